import type { Grade } from "./types.js";

/**
 * Keyboard mapping. Judging ninety documents in a sitting lives or dies
 * on per-document interaction cost, so grades sit on bare keys:
 * 0/1/2 grade directly, x is "can't render" (-1), j/k or arrows move,
 * / jumps to search, Enter/n cycles search matches.
 */

export type ShortcutAction =
  | { kind: "grade"; grade: Grade }
  | { kind: "move"; direction: 1 | -1 }
  | { kind: "focus-search" }
  | { kind: "search-next" }
  | { kind: "search-prev" }
  | { kind: "leave-search" };

export function actionForKey(key: string, typing: boolean): ShortcutAction | null {
  if (typing) {
    // while the search box has focus only these leak through
    if (key === "Escape") return { kind: "leave-search" };
    if (key === "Enter") return { kind: "search-next" };
    return null;
  }
  switch (key) {
    case "0":
      return { kind: "grade", grade: 0 };
    case "1":
      return { kind: "grade", grade: 1 };
    case "2":
      return { kind: "grade", grade: 2 };
    case "x":
    case "X":
      return { kind: "grade", grade: -1 };
    case "j":
    case "ArrowDown":
      return { kind: "move", direction: 1 };
    case "k":
    case "ArrowUp":
      return { kind: "move", direction: -1 };
    case "/":
      return { kind: "focus-search" };
    case "n":
      return { kind: "search-next" };
    case "p":
      return { kind: "search-prev" };
    default:
      return null;
  }
}

/** True when the event target is somewhere the user is typing text. */
export function isTypingTarget(target: EventTarget | null): boolean {
  if (!target || !(target instanceof Element)) return false;
  const tag = target.tagName.toLowerCase();
  return tag === "input" || tag === "textarea" || tag === "select";
}

export function attachShortcuts(
  doc: Document,
  handle: (action: ShortcutAction) => void,
): () => void {
  const listener = (event: Event) => {
    const key = (event as KeyboardEvent).key;
    const action = actionForKey(key, isTypingTarget(event.target));
    if (action) {
      event.preventDefault();
      handle(action);
    }
  };
  doc.addEventListener("keydown", listener);
  return () => doc.removeEventListener("keydown", listener);
}
