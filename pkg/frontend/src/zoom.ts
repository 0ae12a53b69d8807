/** Shared zoom state for the side-by-side viewer.
 *
 * Both images get the same transform, so scrolling in on one scrolls in
 * on the other at the same spot; the whole point of the viewer is
 * difference-spotting at matching positions.
 */

export interface Zoom {
  scale: number;
  x: number;
  y: number;
}

export const ZOOM_MIN = 1;
export const ZOOM_MAX = 8;

export function resetZoom(): Zoom {
  return { scale: 1, x: 0, y: 0 };
}

export function zoomBy(zoom: Zoom, factor: number): Zoom {
  const scale = Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, zoom.scale * factor));
  if (scale === 1) {
    return resetZoom();
  }
  return { ...zoom, scale };
}

export function panBy(zoom: Zoom, dx: number, dy: number): Zoom {
  if (zoom.scale === 1) {
    return zoom;
  }
  return { ...zoom, x: zoom.x + dx, y: zoom.y + dy };
}

/** CSS transform applied to both images at once. */
export function zoomTransform(zoom: Zoom): string {
  return `translate(${zoom.x}px, ${zoom.y}px) scale(${zoom.scale})`;
}
