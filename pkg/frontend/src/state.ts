/** Browse-and-annotate state transitions, kept pure for testing.
 *
 * The rendered list is always the service's response verbatim: items
 * stay in response order, and a card's annotation state changes only
 * through `applyAck` with what the server acknowledged.  Nothing here
 * mutates; every transition returns a new state.
 */

import type { ListQuery, Page, PairSummary } from "./api.js";
import { ApiError } from "./api.js";

export interface BrowseState {
  query: ListQuery;
  items: PairSummary[];
  total: number;
  /** Index into items; -1 when the page is empty. */
  selected: number;
}

export function initialBrowse(query?: Partial<ListQuery>): BrowseState {
  return {
    query: { page: 1, size: 50, sort: "gap", status: "any", ...query },
    items: [],
    total: 0,
    selected: -1,
  };
}

/** Adopt one service page, preserving its order exactly. */
export function loadPage(
  state: BrowseState,
  page: Page<PairSummary>,
  selectLast = false,
): BrowseState {
  const selected =
    page.items.length === 0 ? -1 : selectLast ? page.items.length - 1 : 0;
  return {
    query: { ...state.query, page: page.page, size: page.size },
    items: page.items,
    total: page.total,
    selected,
  };
}

export type Move =
  | { kind: "select"; index: number }
  | { kind: "page"; page: number; selectLast: boolean }
  | { kind: "stay" };

/** Step the selection forward; at the end of a page, advance the page. */
export function selectNext(state: BrowseState): Move {
  if (state.selected < state.items.length - 1) {
    return { kind: "select", index: state.selected + 1 };
  }
  if (state.query.page * state.query.size < state.total) {
    return { kind: "page", page: state.query.page + 1, selectLast: false };
  }
  return { kind: "stay" };
}

export function selectPrev(state: BrowseState): Move {
  if (state.selected > 0) {
    return { kind: "select", index: state.selected - 1 };
  }
  if (state.query.page > 1) {
    return { kind: "page", page: state.query.page - 1, selectLast: true };
  }
  return { kind: "stay" };
}

export function withSelection(state: BrowseState, index: number): BrowseState {
  if (index < -1 || index >= state.items.length) {
    throw new RangeError(`selection ${index} out of range`);
  }
  return { ...state, selected: index };
}

/** Update one card from a server acknowledgement, never speculatively. */
export function applyAck(
  state: BrowseState,
  pairId: string,
  status: string,
): BrowseState {
  return {
    ...state,
    items: state.items.map((item) =>
      item.pair_id === pairId ? { ...item, annotation_status: status } : item,
    ),
  };
}

/** At most one in-flight save per pair; saves on other pairs may overlap. */
export class SaveTracker {
  private readonly inFlight = new Set<string>();

  begin(pairId: string): boolean {
    if (this.inFlight.has(pairId)) {
      return false;
    }
    this.inFlight.add(pairId);
    return true;
  }

  finish(pairId: string): void {
    this.inFlight.delete(pairId);
  }

  saving(pairId: string): boolean {
    return this.inFlight.has(pairId);
  }
}

export type ErrorPlacement =
  | { kind: "banner"; message: string }
  | { kind: "inline"; message: string };

/** Transport problems get a banner; server rejections go next to the
 * form, word for word. */
export function describeError(err: unknown): ErrorPlacement {
  if (err instanceof ApiError) {
    if (err.transport) {
      return { kind: "banner", message: err.message };
    }
    return { kind: "inline", message: err.message };
  }
  const message = err instanceof Error ? err.message : String(err);
  return { kind: "banner", message };
}
