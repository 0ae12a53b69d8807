/** Keyboard map: one pure decision function the app layer applies.
 *
 * List view: j/k or the arrow keys walk the ranked order (crossing page
 * boundaries), Enter opens the selected pair.  Detail view: the same
 * next/prev keys move within the ranked order, Escape goes back, and
 * +/-/0 drive the shared zoom.
 */

export type View = "list" | "detail";

export type KeyAction =
  | { kind: "next" }
  | { kind: "prev" }
  | { kind: "open" }
  | { kind: "back" }
  | { kind: "zoom"; factor: number }
  | { kind: "zoomReset" };

export function keyAction(key: string, view: View): KeyAction | null {
  switch (key) {
    case "j":
    case "ArrowDown":
    case "ArrowRight":
      return { kind: "next" };
    case "k":
    case "ArrowUp":
    case "ArrowLeft":
      return { kind: "prev" };
    case "Enter":
      return view === "list" ? { kind: "open" } : null;
    case "Escape":
      return view === "detail" ? { kind: "back" } : null;
    case "+":
    case "=":
      return view === "detail" ? { kind: "zoom", factor: 1.25 } : null;
    case "-":
      return view === "detail" ? { kind: "zoom", factor: 0.8 } : null;
    case "0":
      return view === "detail" ? { kind: "zoomReset" } : null;
    default:
      return null;
  }
}

/** Keys must not fire while the curator is typing in the form. */
export function isTypingTarget(target: EventTarget | null): boolean {
  if (!target || !(target instanceof Element)) {
    return false;
  }
  const tag = target.tagName.toLowerCase();
  return tag === "input" || tag === "textarea" || tag === "select";
}
