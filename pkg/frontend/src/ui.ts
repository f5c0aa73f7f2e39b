/** Small DOM helpers and panel renderers.  Everything here draws from
 * ConsoleState or an API response; no speculative state. */

import type { ActivityView, Candidate, OutcomeMenu, ScenarioRow } from "./api.js";
import type { ChatEntry, TimelineStep } from "./state.js";
import type { GraphLayout } from "./graph.js";
import type { HistogramRow } from "./metrics.js";

type Child = Node | string;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function clear(node: HTMLElement): HTMLElement {
  node.replaceChildren();
  return node;
}

export function renderPhaseBanner(target: HTMLElement, phase: string): void {
  clear(target).append(
    el("span", { class: `phase phase-${phase}` }, phase),
    phase === "done" ? el("span", { class: "done-note" }, " activity satisfied") : "",
  );
}

export function renderTranslation(target: HTMLElement, view: ActivityView, onConfirm: () => void): void {
  const expressions = el("ul", { class: "expressions" });
  for (const expr of view.expressions) {
    expressions.append(el("li", {}, `"${expr.text}" @ ${expr.offset}`));
  }
  const bindings = el("ul", { class: "bindings" });
  for (const [placeholder, identifier] of Object.entries(view.bindings)) {
    bindings.append(el("li", {}, `${placeholder} -> ${identifier}`));
  }
  const confirm = el("button", { class: "confirm" }, "Confirm and plan");
  confirm.addEventListener("click", onConfirm);
  clear(target).append(
    view.symbolic_formula === null
      ? el("p", {}, "explicit formula (no extraction)")
      : el("div", {},
          el("h3", {}, "referring expressions"), expressions,
          el("p", {}, `symbolic: ${view.symbolic_formula}`
            + (view.pattern === null ? "" : ` [${view.pattern}]`)),
          el("h3", {}, "bindings"), bindings),
    el("p", { class: "formula" }, `grounded: ${view.formula}`),
    confirm,
  );
}

export function renderCandidatePicker(
  target: HTMLElement,
  expression: string,
  candidates: Candidate[],
  onPick: (identifier: string) => void,
): void {
  const list = el("div", { class: "candidates" });
  for (const candidate of candidates) {
    const button = el("button", { class: "candidate" },
      `${candidate.identifier} (${candidate.score.toFixed(2)})`);
    button.addEventListener("click", () => onPick(candidate.identifier));
    list.append(button);
  }
  clear(target).append(
    el("p", { class: "error" }, `could not ground "${expression}"; nearest symbols:`),
    list,
  );
}

export function renderMenuModal(
  target: HTMLElement,
  menu: OutcomeMenu,
  onChoose: (index: number) => void,
): void {
  const options = el("div", { class: "menu-options" });
  menu.options.forEach((fluents, index) => {
    const button = el("button", { class: "menu-option" },
      fluents.length > 0 ? fluents.join(", ") : "(no change)");
    button.addEventListener("click", () => onChoose(index));
    options.append(button);
  });
  clear(target).append(
    el("div", { class: "modal" },
      el("p", {}, `${menu.action} has several possible outcomes:`),
      options),
  );
  target.classList.add("open");
}

export function closeMenuModal(target: HTMLElement): void {
  clear(target);
  target.classList.remove("open");
}

export function renderTimeline(target: HTMLElement, steps: TimelineStep[]): void {
  const list = el("ol", { class: "timeline" });
  for (const step of steps) {
    const item = el("li", {},
      el("span", { class: "step-action" }, `t=${step.t} ${step.action}`),
      el("span", { class: "step-outcome" }, ` outcome ${step.outcome}`),
      step.goal ? el("span", { class: "goal-flag" }, " goal") : "");
    const diff = el("span", { class: "diff" });
    for (const fluent of step.added) diff.append(el("span", { class: "added" }, ` +${fluent}`));
    for (const fluent of step.removed) diff.append(el("span", { class: "removed" }, ` -${fluent}`));
    item.append(diff);
    list.append(item);
  }
  clear(target).append(list);
}

export function renderStateFluents(target: HTMLElement, fluents: string[]): void {
  const list = el("ul", { class: "fluents" });
  for (const fluent of fluents) list.append(el("li", {}, fluent));
  clear(target).append(list);
}

export function renderChat(target: HTMLElement, entries: ChatEntry[]): void {
  const list = el("ol", { class: "chat" });
  for (const entry of entries) {
    list.append(el("li", {},
      el("p", { class: "question" }, `${entry.question} [${entry.scenario}]`),
      el("p", { class: "answer" }, entry.answer),
      el("span", { class: "badge" }, `S ${entry.soundness.toFixed(2)}`),
      el("span", { class: "badge" }, `C ${entry.completeness.toFixed(2)}`)));
  }
  clear(target).append(list);
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderGraph(target: HTMLElement, layout: GraphLayout): void {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  svg.setAttribute("class", "plan-graph");
  const positions = new Map(layout.nodes.map((n) => [n.id, n]));
  for (const edge of layout.edges) {
    const source = positions.get(edge.source);
    const targetNode = positions.get(edge.target);
    if (!source || !targetNode) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(source.x));
    line.setAttribute("y1", String(source.y));
    line.setAttribute("x2", String(targetNode.x));
    line.setAttribute("y2", String(targetNode.y));
    line.setAttribute("class", "edge");
    svg.append(line);
  }
  for (const node of layout.nodes) {
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", "10");
    circle.setAttribute("class",
      node.goal ? "node goal" : node.initial ? "node initial" : "node");
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = node.id;
    circle.append(title);
    svg.append(circle);
  }
  clear(target).append(svg);
}

export function renderMetrics(
  target: HTMLElement,
  stats: ScenarioRow[],
  histogram: HistogramRow[] | null,
): void {
  const table = el("table", { class: "stats" },
    el("tr", {},
      el("th", {}, "question"), el("th", {}, "S"), el("th", {}, "C"),
      el("th", {}, "runs"), el("th", {}, "failed")));
  for (const row of stats) {
    table.append(el("tr", {},
      el("td", {}, row.category),
      el("td", {}, `${row.mean_soundness.toFixed(2)} ± ${row.std_soundness.toFixed(2)}`),
      el("td", {}, `${row.mean_completeness.toFixed(2)} ± ${row.std_completeness.toFixed(2)}`),
      el("td", {}, String(row.runs)),
      el("td", {}, String(row.failures))));
  }
  clear(target).append(table);
  if (histogram !== null) {
    const offsets = el("table", { class: "histogram" },
      el("tr", {},
        el("th", {}, "offset"), el("th", {}, "correct"),
        el("th", {}, "hallucinated"), el("th", {}, "missing"), el("th", {}, "n")));
    for (const row of histogram) {
      offsets.append(el("tr", {},
        el("td", {}, String(row.offset)),
        el("td", {}, row.correct.toFixed(3)),
        el("td", {}, row.hallucinated.toFixed(3)),
        el("td", {}, row.missing.toFixed(3)),
        el("td", {}, String(row.n))));
    }
    target.append(el("h3", {}, "by temporal offset"), offsets);
  }
}
