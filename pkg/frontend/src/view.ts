/** DOM rendering: a pure view over SessionState, rebuilt on every change. */

import { Outcome, TupleView } from "./api.js";
import { SessionState } from "./session.js";

export interface ViewHandlers {
  choose(outcome: Outcome): void;
  stop(): void;
  retry(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** Raw service value, displayed verbatim; no rounding or unit math here. */
function valueText(value: number): string {
  return String(value);
}

function attributeTable(t: TupleView): HTMLTableElement {
  const table = el("table", "attributes");
  table.dataset.testid = "attribute-table";
  for (const [name, value] of Object.entries(t.attributes)) {
    const row = el("tr");
    row.appendChild(el("td", "attr-name", name));
    row.appendChild(el("td", "attr-value", valueText(value)));
    table.appendChild(row);
  }
  return table;
}

function candidateCard(
  label: string,
  t: TupleView,
  outcome: Outcome,
  disabled: boolean,
  handlers: ViewHandlers,
): HTMLElement {
  const card = el("section", "card");
  card.dataset.testid = `card-${outcome}`;
  card.appendChild(el("h2", "card-title", label));
  card.appendChild(el("p", "card-id", `id ${String(t.id)}`));
  card.appendChild(attributeTable(t));
  const button = el("button", "choose", `Choose ${label}`);
  button.dataset.testid = `choose-${outcome}`;
  button.disabled = disabled;
  button.addEventListener("click", () => handlers.choose(outcome));
  card.appendChild(button);
  return card;
}

function progressPanel(state: SessionState): HTMLElement {
  const panel = el("aside", "progress");
  panel.dataset.testid = "progress";
  const p = state.progress;
  if (p === null) {
    panel.appendChild(el("p", "muted", "loading progress"));
    return panel;
  }
  const items: [string, string][] = [
    ["comparisons", String(p.comparisons_used)],
    ["tuples seen", `${p.tuples_seen} of ${p.total}`],
    ["tuples pruned", String(p.tuples_pruned)],
    ["filters built", String(p.filters_built)],
    ["pool fill", String(p.pool_fill)],
  ];
  const list = el("dl");
  for (const [name, value] of items) {
    list.appendChild(el("dt", undefined, name));
    const dd = el("dd", undefined, value);
    dd.dataset.metric = name.replace(/ /g, "-");
    list.appendChild(dd);
  }
  panel.appendChild(list);
  if (p.stopped && p.state !== "done") {
    panel.appendChild(el("p", "muted", "stopped, finishing the last comparisons"));
  }
  return panel;
}

function queryScreen(state: SessionState, handlers: ViewHandlers): HTMLElement {
  const main = el("main", "query");
  const q = state.query;
  if (q === null || q.first === null || q.second === null) {
    main.appendChild(el("p", "muted", "waiting for the first question"));
    return main;
  }
  const disabled = state.phase === "submitting";
  main.appendChild(el("h1", undefined, "Which do you prefer?"));
  const pair = el("div", "pair");
  pair.appendChild(candidateCard("A", q.first, "first", disabled, handlers));
  pair.appendChild(candidateCard("B", q.second, "second", disabled, handlers));
  main.appendChild(pair);

  const controls = el("div", "controls");
  const tie = el("button", "tie", "They are equally good");
  tie.dataset.testid = "choose-tie";
  tie.disabled = disabled;
  tie.addEventListener("click", () => handlers.choose("tie"));
  controls.appendChild(tie);

  const stop = el("button", "stop", "Stop now, recommend from what you have");
  stop.dataset.testid = "stop";
  stop.disabled = disabled;
  stop.addEventListener("click", () => handlers.stop());
  controls.appendChild(stop);
  main.appendChild(controls);
  return main;
}

function resultScreen(state: SessionState): HTMLElement {
  const main = el("main", "result");
  main.dataset.testid = "result";
  const r = state.result;
  if (r === null) {
    main.appendChild(el("p", "muted", "collecting the recommendation"));
    return main;
  }
  main.appendChild(el("h1", undefined, "Recommended for you"));
  const card = el("section", "card winner");
  card.appendChild(el("p", "card-id", `id ${String(r.winner.id)}`));
  card.appendChild(attributeTable(r.winner));
  main.appendChild(card);
  const closing = r.stopped_early
    ? `picked from the ${r.tuples_seen} tuples reviewed before you stopped`
    : `picked from all ${r.tuples_seen} tuples`;
  main.appendChild(
    el("p", "summary", `${closing}, using ${r.comparisons} comparisons`),
  );
  return main;
}

export function render(root: HTMLElement, state: SessionState, handlers: ViewHandlers): void {
  root.textContent = "";

  if (state.errorMessage !== null) {
    const banner = el("div", "banner error");
    banner.dataset.testid = "error-banner";
    banner.appendChild(el("span", undefined, state.errorMessage));
    const retry = el("button", "retry", "Retry");
    retry.dataset.testid = "retry";
    retry.addEventListener("click", () => handlers.retry());
    banner.appendChild(retry);
    root.appendChild(banner);
  }
  if (state.notice !== null) {
    const notice = el("div", "banner notice", state.notice);
    notice.dataset.testid = "notice";
    root.appendChild(notice);
  }

  if (state.phase === "done") {
    root.appendChild(resultScreen(state));
  } else if (state.phase === "loading") {
    root.appendChild(el("main", "query", "starting your session"));
  } else {
    root.appendChild(queryScreen(state, handlers));
  }
  root.appendChild(progressPanel(state));
}
