/**
 * In-document search: case-insensitive substring matching over the
 * viewer's text, with a cursor that cycles through the matches.
 */

export interface SearchState {
  query: string;
  count: number;
  /** 0-based index of the active match; -1 when there are none. */
  cursor: number;
}

export const EMPTY_SEARCH: SearchState = { query: "", count: 0, cursor: -1 };

/** Start positions of every non-overlapping case-insensitive match. */
export function findMatches(text: string, query: string): number[] {
  if (!query) return [];
  const haystack = text.toLowerCase();
  const needle = query.toLowerCase();
  const positions: number[] = [];
  let at = haystack.indexOf(needle);
  while (at !== -1) {
    positions.push(at);
    at = haystack.indexOf(needle, at + needle.length);
  }
  return positions;
}

export function startSearch(text: string, query: string): SearchState {
  if (!query) return EMPTY_SEARCH;
  const count = findMatches(text, query).length;
  return { query, count, cursor: count ? 0 : -1 };
}

/** Move the cursor by +1/-1, wrapping in both directions. */
export function advanceCursor(state: SearchState, direction: 1 | -1): SearchState {
  if (state.count === 0) return state;
  return {
    ...state,
    cursor: (state.cursor + direction + state.count) % state.count,
  };
}

/**
 * Wrap every match inside the container's text nodes in a
 * `<span class="search-hit">`, returning how many were marked. Call with
 * an empty query to just count zero; callers should re-render the body
 * before re-highlighting so spans never nest.
 */
export function highlightMatches(container: HTMLElement, query: string): number {
  if (!query) return 0;
  const doc = container.ownerDocument;
  const walker = doc.createTreeWalker(container, 4 /* NodeFilter.SHOW_TEXT */);
  const textNodes: Text[] = [];
  for (let node = walker.nextNode(); node; node = walker.nextNode()) {
    textNodes.push(node as Text);
  }
  let marked = 0;
  const needle = query.toLowerCase();
  for (const node of textNodes) {
    const text = node.data;
    const positions = findMatches(text, needle);
    if (!positions.length) continue;
    const frag = doc.createDocumentFragment();
    let last = 0;
    for (const pos of positions) {
      frag.appendChild(doc.createTextNode(text.slice(last, pos)));
      const span = doc.createElement("span");
      span.className = "search-hit";
      span.textContent = text.slice(pos, pos + needle.length);
      frag.appendChild(span);
      last = pos + needle.length;
      marked++;
    }
    frag.appendChild(doc.createTextNode(text.slice(last)));
    node.parentNode?.replaceChild(frag, node);
  }
  return marked;
}

/** Scroll the cursor's hit into view and style it as the active one. */
export function focusMatch(container: HTMLElement, cursor: number): void {
  const hits = container.querySelectorAll<HTMLElement>(".search-hit");
  hits.forEach((el, i) => {
    el.classList.toggle("search-hit-active", i === cursor);
  });
  const active = hits[cursor];
  if (active && typeof active.scrollIntoView === "function") {
    active.scrollIntoView({ block: "nearest" });
  }
}
