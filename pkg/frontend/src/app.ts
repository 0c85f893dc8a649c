// Explorer controller: state, request sequencing, and DOM wiring.
//
// Each panel (search, ask, doc) keeps a monotonically increasing request
// sequence; a response is rendered only if it is still the newest request
// of its panel, so stale responses are discarded and at most one response
// per panel ever lands. Parameter changes re-query on demand ('change'
// events), one request per change.

import { ApiClient } from "./api";
import { renderAnswer, renderDoc, renderError, renderSearchResults } from "./render";
import { initialState, type ExplorerState, type SearchMethod } from "./types";

export type ExplorerElements = {
  query: HTMLInputElement;
  lat: HTMLInputElement;
  lon: HTMLInputElement;
  radius: HTMLInputElement;
  radiusValue: HTMLElement;
  alpha: HTMLInputElement;
  alphaValue: HTMLElement;
  k: HTMLInputElement;
  method: HTMLSelectElement;
  askMode: HTMLInputElement;
  run: HTMLButtonElement;
  status: HTMLElement;
  results: HTMLElement;
  detail: HTMLElement;
};

const numberOrNull = (raw: string): number | null => {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
};

export class Explorer {
  readonly state: ExplorerState = initialState();
  private searchSeq = 0;
  private docSeq = 0;

  constructor(
    private readonly elements: ExplorerElements,
    private readonly api: ApiClient,
  ) {
    this.bind();
    this.syncLabels();
  }

  private bind(): void {
    const { elements } = this;
    elements.run.addEventListener("click", () => void this.run());
    elements.query.addEventListener("keydown", (event) => {
      if (event.key === "Enter") void this.run();
    });
    // Sliders re-query on commit: exactly one request per change.
    elements.alpha.addEventListener("change", () => {
      this.readControls();
      void this.run();
    });
    elements.radius.addEventListener("change", () => {
      this.readControls();
      void this.run();
    });
    elements.alpha.addEventListener("input", () => {
      this.readControls();
      this.syncLabels();
    });
    elements.radius.addEventListener("input", () => {
      this.readControls();
      this.syncLabels();
    });
    elements.method.addEventListener("change", () => {
      this.readControls();
      void this.run();
    });
    elements.k.addEventListener("change", () => {
      this.readControls();
      void this.run();
    });
  }

  readControls(): void {
    const { elements, state } = this;
    state.query = elements.query.value;
    state.lat = numberOrNull(elements.lat.value);
    state.lon = numberOrNull(elements.lon.value);
    state.radiusM = Number(elements.radius.value);
    state.alpha = Number(elements.alpha.value);
    state.k = Math.max(1, Math.floor(Number(elements.k.value) || 5));
    state.method = elements.method.value as SearchMethod;
    state.askMode = elements.askMode.checked;
  }

  private syncLabels(): void {
    this.elements.alphaValue.textContent = this.state.alpha.toFixed(2);
    this.elements.radiusValue.textContent = `${(this.state.radiusM / 1000).toFixed(0)} км`;
  }

  async run(): Promise<void> {
    this.readControls();
    this.syncLabels();
    if (!this.state.query.trim()) {
      // Input validation: no request leaves the client.
      this.elements.status.textContent = "Введите запрос";
      return;
    }
    this.elements.status.textContent = "…";
    const seq = ++this.searchSeq;
    try {
      if (this.state.askMode) {
        const response = await this.api.ask(this.state);
        if (seq !== this.searchSeq) return; // stale
        renderAnswer(this.elements.results, response);
      } else {
        const response = await this.api.search(this.state);
        if (seq !== this.searchSeq) return; // stale
        renderSearchResults(this.elements.results, response, (docId) => void this.showDoc(docId));
      }
      this.elements.status.textContent = "";
    } catch (error) {
      if (seq !== this.searchSeq) return;
      // Errors are surfaced inline; inputs and state stay as they were.
      renderError(this.elements.results, `Ошибка сервиса: ${(error as Error).message}`);
      this.elements.status.textContent = "";
    }
  }

  async showDoc(docId: string): Promise<void> {
    const seq = ++this.docSeq;
    try {
      const response = await this.api.doc(docId);
      if (seq !== this.docSeq) return;
      renderDoc(this.elements.detail, response);
    } catch (error) {
      if (seq !== this.docSeq) return;
      renderError(this.elements.detail, `Ошибка сервиса: ${(error as Error).message}`);
    }
  }
}

export function mount(root: Document, api: ApiClient): Explorer {
  const get = <T extends HTMLElement>(id: string): T => {
    const node = root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  };
  return new Explorer(
    {
      query: get<HTMLInputElement>("query"),
      lat: get<HTMLInputElement>("lat"),
      lon: get<HTMLInputElement>("lon"),
      radius: get<HTMLInputElement>("radius"),
      radiusValue: get<HTMLElement>("radius-value"),
      alpha: get<HTMLInputElement>("alpha"),
      alphaValue: get<HTMLElement>("alpha-value"),
      k: get<HTMLInputElement>("k"),
      method: get<HTMLSelectElement>("method"),
      askMode: get<HTMLInputElement>("ask-mode"),
      run: get<HTMLButtonElement>("run"),
      status: get<HTMLElement>("status"),
      results: get<HTMLElement>("results"),
      detail: get<HTMLElement>("detail"),
    },
    api,
  );
}
