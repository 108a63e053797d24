import { describe, expect, it } from "vitest";

import { actionForKey, attachShortcuts, isTypingTarget } from "../src/shortcuts.js";

describe("actionForKey", () => {
  it("maps the digit keys to their grades", () => {
    expect(actionForKey("0", false)).toEqual({ kind: "grade", grade: 0 });
    expect(actionForKey("1", false)).toEqual({ kind: "grade", grade: 1 });
    expect(actionForKey("2", false)).toEqual({ kind: "grade", grade: 2 });
  });

  it("maps x (either case) to can't-render", () => {
    expect(actionForKey("x", false)).toEqual({ kind: "grade", grade: -1 });
    expect(actionForKey("X", false)).toEqual({ kind: "grade", grade: -1 });
  });

  it("maps navigation keys", () => {
    expect(actionForKey("j", false)).toEqual({ kind: "move", direction: 1 });
    expect(actionForKey("ArrowUp", false)).toEqual({ kind: "move", direction: -1 });
    expect(actionForKey("/", false)).toEqual({ kind: "focus-search" });
    expect(actionForKey("n", false)).toEqual({ kind: "search-next" });
    expect(actionForKey("p", false)).toEqual({ kind: "search-prev" });
  });

  it("swallows grade keys while typing in the search box", () => {
    expect(actionForKey("2", true)).toBeNull();
    expect(actionForKey("x", true)).toBeNull();
    expect(actionForKey("Enter", true)).toEqual({ kind: "search-next" });
    expect(actionForKey("Escape", true)).toEqual({ kind: "leave-search" });
  });

  it("ignores unmapped keys", () => {
    expect(actionForKey("q", false)).toBeNull();
    expect(actionForKey("Tab", false)).toBeNull();
  });
});

describe("isTypingTarget", () => {
  it("treats inputs and textareas as typing targets", () => {
    expect(isTypingTarget(document.createElement("input"))).toBe(true);
    expect(isTypingTarget(document.createElement("textarea"))).toBe(true);
    expect(isTypingTarget(document.createElement("div"))).toBe(false);
    expect(isTypingTarget(null)).toBe(false);
  });
});

describe("attachShortcuts", () => {
  it("dispatches mapped keys and can be detached", () => {
    const seen: string[] = [];
    const detach = attachShortcuts(document, (a) => seen.push(a.kind));

    document.dispatchEvent(new KeyboardEvent("keydown", { key: "1" }));
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "q" }));
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "j" }));
    expect(seen).toEqual(["grade", "move"]);

    detach();
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "1" }));
    expect(seen).toEqual(["grade", "move"]);
  });

  it("does not grade while the search input has focus", () => {
    const input = document.createElement("input");
    document.body.appendChild(input);
    const seen: string[] = [];
    const detach = attachShortcuts(document, (a) => seen.push(a.kind));

    input.focus();
    input.dispatchEvent(new KeyboardEvent("keydown", { key: "2", bubbles: true }));
    expect(seen).toEqual([]);

    detach();
    input.remove();
  });
});
