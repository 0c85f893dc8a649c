// DOM builders. Every number shown comes straight from a service response.

import { splitAnswerSpan } from "./highlight";
import type { AskResponse, DocResponse, Hit, SearchResponse } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function scoreChip(label: string, value: number | null, field: string): HTMLElement {
  const chip = el("span", "score-chip");
  chip.dataset.field = field;
  chip.textContent = value === null ? `${label}: –` : `${label}: ${value.toFixed(3)}`;
  return chip;
}

export function renderHit(hit: Hit, onSelect: (docId: string) => void): HTMLElement {
  const row = el("article", "hit");
  row.dataset.docId = hit.doc_id;

  const head = el("header", "hit-head");
  head.appendChild(el("span", "hit-rank", `${hit.rank}.`));
  const name = el("a", "hit-name", hit.display_name || hit.doc_id);
  name.href = "#";
  name.addEventListener("click", (event) => {
    event.preventDefault();
    onSelect(hit.doc_id);
  });
  head.appendChild(name);
  if (hit.name_tat && hit.name_tat !== hit.display_name) {
    head.appendChild(el("span", "hit-alt-name", hit.name_tat));
  }
  if (hit.distance_m !== null) {
    head.appendChild(el("span", "hit-distance", `${(hit.distance_m / 1000).toFixed(1)} km`));
  }
  row.appendChild(head);

  // The point of the explorer: the fusion decomposition is always visible.
  const scores = el("div", "hit-scores");
  scores.appendChild(scoreChip("sem", hit.sem_norm, "sem_norm"));
  scores.appendChild(scoreChip("geo", hit.geo_norm, "geo_norm"));
  scores.appendChild(scoreChip("combined", hit.combined, "combined"));
  row.appendChild(scores);

  row.appendChild(el("p", "hit-snippet", hit.snippet));
  return row;
}

export function renderSearchResults(
  container: HTMLElement,
  response: SearchResponse,
  onSelect: (docId: string) => void,
): void {
  container.replaceChildren();
  for (const diagnostic of response.diagnostics) {
    container.appendChild(el("p", "diagnostic", diagnostic));
  }
  if (response.hits.length === 0) {
    container.appendChild(el("p", "empty", "Ничего не найдено"));
    return;
  }
  for (const hit of response.hits) {
    container.appendChild(renderHit(hit, onSelect));
  }
}

export function renderAnswer(container: HTMLElement, response: AskResponse): void {
  container.replaceChildren();
  for (const diagnostic of response.diagnostics) {
    container.appendChild(el("p", "diagnostic", diagnostic));
  }
  if (!response.answer) {
    container.appendChild(el("p", "no-answer", "Ответ не найден"));
    return;
  }
  const card = el("article", "answer-card");
  card.appendChild(el("p", "answer-text", response.answer));
  const meta = el("p", "answer-meta");
  meta.textContent = `категория: ${response.category ?? "?"} · документ: ${response.doc_id ?? "?"}`;
  card.appendChild(meta);

  const split = splitAnswerSpan(response.context, response.answer, response.answer_start);
  const contextNode = el("p", "answer-context");
  if (split.ok) {
    contextNode.appendChild(document.createTextNode(split.before));
    const mark = el("mark", "answer-span", split.span);
    contextNode.appendChild(mark);
    contextNode.appendChild(document.createTextNode(split.after));
  } else {
    // Never highlight a span that fails the offset re-check.
    contextNode.textContent = response.context;
    card.appendChild(el("p", "diagnostic", "span offset failed verification; highlight suppressed"));
  }
  card.appendChild(contextNode);
  container.appendChild(card);
}

export function renderDoc(container: HTMLElement, response: DocResponse): void {
  container.replaceChildren();
  const card = el("article", "doc-card");
  const record = response.record;
  card.appendChild(el("h3", "doc-title", String(record["name_rus"] || record["name_tat"] || record["id"])));
  const table = el("dl", "doc-fields");
  for (const [key, value] of Object.entries(record)) {
    if (value === null || value === "" || value === undefined) continue;
    table.appendChild(el("dt", undefined, key));
    table.appendChild(el("dd", undefined, String(value)));
  }
  card.appendChild(table);
  card.appendChild(el("h4", undefined, "Контекст (QA)"));
  card.appendChild(el("p", "doc-context", response.qa_context));
  container.appendChild(card);
}

export function renderError(container: HTMLElement, message: string): void {
  const banner = el("p", "error-banner", message);
  container.replaceChildren(banner);
}
