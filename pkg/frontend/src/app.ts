import type { JudgeApi } from "./api.js";
import {
  EMPTY_SEARCH,
  SearchState,
  advanceCursor,
  focusMatch,
  highlightMatches,
  startSearch,
} from "./search.js";
import { ShortcutAction, attachShortcuts } from "./shortcuts.js";
import { optimistic, RetryQueue } from "./optimistic.js";
import {
  renderAssignmentList,
  renderDocument,
  renderGradeBar,
  renderProgress,
  renderTopic,
  toast,
} from "./render.js";
import * as viewstate from "./state.js";
import type { DocPayload, Grade, TopicPayload } from "./types.js";

interface Elements {
  list: HTMLElement;
  topic: HTMLElement;
  viewer: HTMLElement;
  grades: HTMLElement;
  progress: HTMLElement;
  searchInput: HTMLInputElement;
  searchCount: HTMLElement;
  toast: HTMLElement;
}

function buildSkeleton(root: HTMLElement): Elements {
  const doc = root.ownerDocument;
  root.textContent = "";
  root.classList.add("judge-app");

  const aside = doc.createElement("aside");
  const progress = doc.createElement("div");
  progress.className = "progress";
  const list = doc.createElement("nav");
  list.className = "assignment-list";
  aside.appendChild(progress);
  aside.appendChild(list);

  const main = doc.createElement("main");
  const topic = doc.createElement("header");
  topic.className = "topic";

  const searchBar = doc.createElement("div");
  searchBar.className = "search-bar";
  const searchInput = doc.createElement("input");
  searchInput.type = "search";
  searchInput.placeholder = "find in document (/)";
  const searchCount = doc.createElement("span");
  searchCount.className = "search-count";
  searchBar.appendChild(searchInput);
  searchBar.appendChild(searchCount);

  const viewer = doc.createElement("article");
  viewer.className = "viewer";
  const grades = doc.createElement("footer");
  grades.className = "grade-bar";
  const toastEl = doc.createElement("div");
  toastEl.className = "toast";

  main.appendChild(topic);
  main.appendChild(searchBar);
  main.appendChild(viewer);
  main.appendChild(grades);
  root.appendChild(aside);
  root.appendChild(main);
  root.appendChild(toastEl);

  return {
    list,
    topic,
    viewer,
    grades,
    progress,
    searchInput,
    searchCount,
    toast: toastEl,
  };
}

/**
 * The judging app: assignment list on the left, document viewer with
 * search and grade buttons on the right. The server's assignment payload
 * is the source of truth; everything the user does is optimistic on top
 * of it and reconciled on reload.
 */
export class AppController {
  private view: viewstate.ViewState;
  private search: SearchState = EMPTY_SEARCH;
  private currentDoc: DocPayload | null = null;
  private readonly topics = new Map<string, TopicPayload>();
  private readonly els: Elements;
  readonly retries = new RetryQueue();
  private readonly detachShortcuts: () => void;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: JudgeApi,
    view: viewstate.ViewState,
  ) {
    this.view = view;
    this.els = buildSkeleton(root);
    this.els.searchInput.addEventListener("input", () => {
      void this.runSearch(this.els.searchInput.value);
    });
    this.detachShortcuts = attachShortcuts(root.ownerDocument, (a) => {
      void this.handleAction(a);
    });
    const win = root.ownerDocument.defaultView;
    win?.addEventListener("online", () => void this.flushRetries());
    this.refreshChrome();
  }

  /** Current rows, for tests and debugging. */
  get docs(): readonly viewstate.DocRow[] {
    return this.view.docs;
  }

  get selectedIndex(): number {
    return this.view.selected;
  }

  get searchState(): SearchState {
    return this.search;
  }

  dispose(): void {
    this.detachShortcuts();
  }

  private refreshChrome(): void {
    renderAssignmentList(this.els.list, this.view.docs, this.view.selected, (i) => {
      void this.selectDoc(i);
    });
    renderProgress(this.els.progress, viewstate.progressOf(this.view.docs));
    const row = this.view.docs[this.view.selected];
    renderGradeBar(this.els.grades, row?.grade ?? null, (g) => {
      void this.grade(g);
    });
  }

  async selectDoc(index: number): Promise<void> {
    const row = this.view.docs[index];
    if (!row) return;
    this.view = { ...this.view, selected: index };
    const payload = await this.api.doc(row.topicId, row.docId);
    this.currentDoc = payload;
    let topic = this.topics.get(row.topicId);
    if (!topic) {
      topic = await this.api.topic(row.topicId);
      this.topics.set(row.topicId, topic);
    }
    renderTopic(this.els.topic, topic);
    renderDocument(this.els.viewer, payload);
    this.search = EMPTY_SEARCH;
    this.els.searchInput.value = "";
    this.els.searchCount.textContent = "";
    this.refreshChrome();
  }

  /** Submit a grade for the selected document, optimistically. */
  async grade(grade: Grade): Promise<void> {
    const index = this.view.selected;
    const row = this.view.docs[index];
    if (!row) return;
    const before = { status: row.status, grade: row.grade };
    const outcome = await optimistic({
      apply: () => {
        this.view = {
          ...this.view,
          docs: viewstate.markPendingSubmit(this.view.docs, row.topicId, row.docId, grade),
        };
        this.refreshChrome();
        return before;
      },
      remote: async () => {
        await this.api.submit(row.topicId, row.docId, grade);
      },
      revert: (snapshot) => {
        this.view = {
          ...this.view,
          docs: viewstate.rollbackSubmit(this.view.docs, row.topicId, row.docId, snapshot),
        };
        this.refreshChrome();
      },
      onRejected: (error) => {
        toast(this.els.toast, `grade rejected: ${error.message}`);
      },
      onQueued: () => {
        toast(this.els.toast, "offline — judgment queued, will retry");
        this.retries.push(
          async () => {
            await this.api.submit(row.topicId, row.docId, grade);
          },
          (result, error) => {
            if (result === "ok") {
              this.view = {
                ...this.view,
                docs: viewstate.confirmSubmit(this.view.docs, row.topicId, row.docId),
              };
            } else {
              this.view = {
                ...this.view,
                docs: viewstate.rollbackSubmit(this.view.docs, row.topicId, row.docId, before),
              };
              toast(this.els.toast, `grade rejected: ${error?.message ?? "unknown"}`);
            }
            this.refreshChrome();
          },
        );
      },
    });
    if (outcome === "ok") {
      this.view = {
        ...this.view,
        docs: viewstate.confirmSubmit(this.view.docs, row.topicId, row.docId),
      };
      this.refreshChrome();
      const next = viewstate.nextPendingIndex(this.view.docs, index);
      if (next !== -1) {
        await this.selectDoc(next);
      }
    }
  }

  async flushRetries(): Promise<void> {
    await this.retries.flush();
  }

  async runSearch(query: string): Promise<void> {
    // re-render the body first so previous hit markers never nest
    if (this.currentDoc) {
      renderDocument(this.els.viewer, this.currentDoc);
    }
    const body = this.els.viewer.querySelector<HTMLElement>(".doc-body");
    if (!body) {
      this.search = EMPTY_SEARCH;
      this.els.searchCount.textContent = "";
      return;
    }
    this.search = startSearch(body.textContent ?? "", query);
    if (query) {
      highlightMatches(body, query);
      focusMatch(body, this.search.cursor);
      this.els.searchCount.textContent = `${this.search.count} match${
        this.search.count === 1 ? "" : "es"
      }`;
    } else {
      this.els.searchCount.textContent = "";
    }
  }

  searchStep(direction: 1 | -1): void {
    this.search = advanceCursor(this.search, direction);
    const body = this.els.viewer.querySelector<HTMLElement>(".doc-body");
    if (body) focusMatch(body, this.search.cursor);
  }

  private async handleAction(action: ShortcutAction): Promise<void> {
    switch (action.kind) {
      case "grade":
        await this.grade(action.grade);
        break;
      case "move": {
        const n = this.view.docs.length;
        if (!n) break;
        const base = this.view.selected === -1 ? 0 : this.view.selected;
        await this.selectDoc((base + action.direction + n) % n);
        break;
      }
      case "focus-search":
        this.els.searchInput.focus();
        break;
      case "search-next":
        this.searchStep(1);
        break;
      case "search-prev":
        this.searchStep(-1);
        break;
      case "leave-search":
        this.els.searchInput.blur();
        break;
    }
  }
}

/** Fetch the assignment and mount the app under `root`. */
export async function initApp(root: HTMLElement, api: JudgeApi): Promise<AppController> {
  const assignment = await api.assignment();
  const controller = new AppController(root, api, viewstate.fromAssignment(assignment));
  if (assignment.docs.length) {
    await controller.selectDoc(0);
  }
  return controller;
}
