import type { DocRow } from "./state.js";
import type { DocPayload, Grade, Progress, TopicPayload } from "./types.js";
import { GRADE_LABELS } from "./types.js";

/** Render the assignment list in server order, one row per document. */
export function renderAssignmentList(
  list: HTMLElement,
  docs: DocRow[],
  selected: number,
  onSelect: (index: number) => void,
): void {
  list.textContent = "";
  const doc = list.ownerDocument;
  if (!docs.length) {
    const empty = doc.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Nothing assigned to you.";
    list.appendChild(empty);
    return;
  }
  docs.forEach((row, i) => {
    const item = doc.createElement("button");
    item.type = "button";
    item.className = "doc-row";
    if (row.status === "judged") item.classList.add("judged");
    if (i === selected) item.classList.add("selected");
    item.dataset.docId = row.docId;
    item.dataset.topicId = row.topicId;

    const name = doc.createElement("span");
    name.className = "doc-name";
    name.textContent = row.docId;
    item.appendChild(name);

    if (row.status === "judged" && row.grade !== null) {
      const badge = doc.createElement("span");
      badge.className = "grade-badge";
      badge.textContent = row.inFlight ? `${row.grade}…` : String(row.grade);
      if (row.inFlight) badge.classList.add("in-flight");
      item.appendChild(badge);
    }
    item.addEventListener("click", () => onSelect(i));
    list.appendChild(item);
  });
}

export function renderProgress(el: HTMLElement, progress: Progress): void {
  el.textContent = "";
  const doc = el.ownerDocument;
  const text = doc.createElement("span");
  text.className = "progress-text";
  text.textContent = `${progress.judged} / ${progress.assigned}`;
  const bar = doc.createElement("div");
  bar.className = "progress-bar";
  const fill = doc.createElement("div");
  fill.className = "progress-fill";
  const pct = progress.assigned ? (100 * progress.judged) / progress.assigned : 0;
  fill.style.width = `${pct}%`;
  bar.appendChild(fill);
  el.appendChild(text);
  el.appendChild(bar);
}

export function renderTopic(el: HTMLElement, topic: TopicPayload): void {
  el.textContent = "";
  const doc = el.ownerDocument;
  const title = doc.createElement("h2");
  title.textContent = topic.title;
  el.appendChild(title);
  const levels = doc.createElement("dl");
  for (const level of topic.levels) {
    const dt = doc.createElement("dt");
    dt.textContent = String(level.grade);
    const dd = doc.createElement("dd");
    dd.textContent = level.description;
    levels.appendChild(dt);
    levels.appendChild(dd);
  }
  el.appendChild(levels);
}

/**
 * Strip anything in the (already server-sanitized) body that could still
 * trigger a network fetch or navigation: src attributes, stylesheet
 * links, hrefs. Text content and highlight marks stay.
 */
function defang(root: HTMLElement): void {
  for (const el of Array.from(root.querySelectorAll("[src]"))) {
    el.removeAttribute("src");
  }
  for (const el of Array.from(root.querySelectorAll("[srcset]"))) {
    el.removeAttribute("srcset");
  }
  for (const el of Array.from(root.querySelectorAll("a[href], link[href]"))) {
    el.removeAttribute("href");
  }
}

export function renderDocument(viewer: HTMLElement, payload: DocPayload): void {
  viewer.textContent = "";
  const doc = viewer.ownerDocument;

  const title = doc.createElement("h3");
  title.className = "doc-title";
  title.textContent = payload.title || payload.doc_id;
  viewer.appendChild(title);

  if (payload.truncated) {
    const notice = doc.createElement("p");
    notice.className = "truncation-notice";
    notice.textContent = "Document was cut at 256 KB; the tail is missing.";
    viewer.appendChild(notice);
  }

  const body = doc.createElement("div");
  body.className = "doc-body";
  body.innerHTML = payload.body;
  defang(body);
  viewer.appendChild(body);
}

/** The four grade buttons; "can't render" is kept visually prominent. */
export function renderGradeBar(
  el: HTMLElement,
  current: Grade | null,
  onGrade: (grade: Grade) => void,
): void {
  el.textContent = "";
  const doc = el.ownerDocument;
  for (const { grade, label } of GRADE_LABELS) {
    const button = doc.createElement("button");
    button.type = "button";
    button.className = "grade-button";
    button.dataset.grade = String(grade);
    if (grade === -1) button.classList.add("cant-render");
    if (grade === current) button.classList.add("current");
    const key = grade === -1 ? "x" : String(grade);
    button.textContent = `${label} (${key})`;
    button.addEventListener("click", () => onGrade(grade));
    el.appendChild(button);
  }
}

let toastTimer: ReturnType<typeof setTimeout> | undefined;

export function toast(el: HTMLElement, message: string): void {
  el.textContent = message;
  el.classList.add("visible");
  if (toastTimer) clearTimeout(toastTimer);
  toastTimer = setTimeout(() => el.classList.remove("visible"), 4000);
}
