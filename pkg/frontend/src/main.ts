/** Console bootstrap: wires the panels to the API client and keeps the
 * view in lockstep with server-confirmed state. */

import { ApiClient, ApiError, isMenu } from "./api.js";
import type { Candidate } from "./api.js";
import { ConsoleState } from "./state.js";
import { EventPoller } from "./poll.js";
import { layoutGraph } from "./graph.js";
import { parseHistogramCsv } from "./metrics.js";
import {
  closeMenuModal, el, renderCandidatePicker, renderChat, renderGraph,
  renderMenuModal, renderMetrics, renderPhaseBanner, renderStateFluents,
  renderTimeline, renderTranslation,
} from "./ui.js";

const QUICK_QUESTIONS: Array<[string, string]> = [
  ["now", "What are you doing now?"],
  ["so far", "What did you do so far?"],
  ["next", "What are you going to do next?"],
];

function panel(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing panel #${id}`);
  return node;
}

function main(): void {
  const api = new ApiClient("");
  const state = new ConsoleState();
  let poller: EventPoller | null = null;
  let autoRun = false;

  const banner = panel("phase-banner");
  const setup = panel("setup-panel");
  const activityPanel = panel("activity-panel");
  const translationPanel = panel("translation-panel");
  const graphPanel = panel("graph-panel");
  const stepperPanel = panel("stepper-panel");
  const statePanel = panel("state-panel");
  const timelinePanel = panel("timeline-panel");
  const modal = panel("menu-modal");
  const chatPanel = panel("chat-panel");
  const chatLog = panel("chat-log");
  const metricsPanel = panel("metrics-panel");
  const errorBar = panel("error-bar");

  function showError(error: unknown): void {
    errorBar.textContent = error instanceof Error ? error.message : String(error);
  }

  function redraw(): void {
    renderPhaseBanner(banner, state.phase);
    renderStateFluents(statePanel, state.currentState);
    renderTimeline(timelinePanel, state.timeline);
    renderChat(chatLog, state.chat);
    if (state.menu !== null) {
      renderMenuModal(modal, state.menu, (index) => void step({ choice: index }));
    } else {
      closeMenuModal(modal);
    }
  }

  async function step(opts: { choice?: number; auto?: boolean }): Promise<void> {
    if (state.sessionId === null) return;
    try {
      const response = await api.step(state.sessionId, opts);
      state.applyStep(response);
      redraw();
      if (!isMenu(response) && autoRun && state.phase !== "done") {
        setTimeout(() => void step({ auto: true }), 150);
      }
    } catch (error) {
      showError(error);
    }
  }

  async function ask(question: string): Promise<void> {
    if (state.sessionId === null) return;
    try {
      const response = await api.query(state.sessionId, { question });
      state.applyQuery(response);
      redraw();
    } catch (error) {
      showError(error);
    }
  }

  // -- setup panel: register domain, open session --------------------------

  const domainInput = setup.querySelector("textarea[name=domain]") as HTMLTextAreaElement;
  const problemInput = setup.querySelector("textarea[name=problem]") as HTMLTextAreaElement;
  const openButton = setup.querySelector("button") as HTMLButtonElement;
  openButton.addEventListener("click", () => void (async () => {
    try {
      const { domain_id } = await api.registerDomain(domainInput.value, problemInput.value);
      const created = await api.createSession(domain_id);
      state.applySession(created);
      poller?.stop();
      poller = new EventPoller(api, created.session_id, (events) => {
        state.ingest(events);
        redraw();
      }, showError);
      poller.start();
      errorBar.textContent = "";
      redraw();
    } catch (error) {
      showError(error);
    }
  })());

  // -- activity panel: sentence or explicit formula -------------------------

  const sentenceInput = activityPanel.querySelector("input[name=sentence]") as HTMLInputElement;
  const formulaInput = activityPanel.querySelector("input[name=formula]") as HTMLInputElement;
  const explicitToggle = activityPanel.querySelector("input[name=explicit]") as HTMLInputElement;
  const submitButton = activityPanel.querySelector("button") as HTMLButtonElement;

  explicitToggle.addEventListener("change", () => {
    // Explicit formula entry skips referring-expression extraction.
    activityPanel.classList.toggle("explicit", explicitToggle.checked);
    translationPanel.hidden = explicitToggle.checked;
  });

  function pickCandidate(identifier: string): void {
    explicitToggle.checked = true;
    explicitToggle.dispatchEvent(new Event("change"));
    formulaInput.value = identifier;
    formulaInput.focus();
  }

  submitButton.addEventListener("click", () => void (async () => {
    if (state.sessionId === null) return;
    try {
      const view = explicitToggle.checked
        ? await api.submitFormula(state.sessionId, formulaInput.value)
        : await api.submitSentence(state.sessionId, sentenceInput.value);
      state.applyActivity(view);
      errorBar.textContent = "";
      if (!explicitToggle.checked) {
        translationPanel.hidden = false;
        renderTranslation(translationPanel, view, () => void confirmActivity());
      } else {
        renderTranslation(translationPanel, view, () => void confirmActivity());
        translationPanel.hidden = false;
      }
      redraw();
    } catch (error) {
      if (error instanceof ApiError && error.detail.code === "unresolved-symbol") {
        translationPanel.hidden = false;
        renderCandidatePicker(
          translationPanel,
          String(error.detail["expression"] ?? ""),
          (error.detail["candidates"] as Candidate[] | undefined) ?? [],
          pickCandidate,
        );
        return;
      }
      showError(error);
    }
  })());

  async function confirmActivity(): Promise<void> {
    if (state.sessionId === null) return;
    try {
      const view = await api.confirm(state.sessionId);
      state.applyConfirm(view);
      renderGraph(graphPanel, layoutGraph(view.plan_graph));
      redraw();
    } catch (error) {
      showError(error);
    }
  }

  // -- stepper ---------------------------------------------------------------

  const stepButton = stepperPanel.querySelector("button[name=step]") as HTMLButtonElement;
  const autoToggle = stepperPanel.querySelector("input[name=auto]") as HTMLInputElement;
  stepButton.addEventListener("click", () => void step({}));
  autoToggle.addEventListener("change", () => {
    autoRun = autoToggle.checked;
    if (autoRun) void step({ auto: true });
  });

  // -- chat ------------------------------------------------------------------

  const questionInput = chatPanel.querySelector("input[name=question]") as HTMLInputElement;
  const askButton = chatPanel.querySelector("button[name=ask]") as HTMLButtonElement;
  askButton.addEventListener("click", () => void ask(questionInput.value));
  const quickRow = chatPanel.querySelector(".quick") as HTMLElement;
  for (const [label, question] of QUICK_QUESTIONS) {
    const button = el("button", { class: "quick-question" }, label);
    button.addEventListener("click", () => void ask(question));
    quickRow.append(button);
  }

  // -- metrics ---------------------------------------------------------------

  const goalInput = metricsPanel.querySelector("input[name=goal]") as HTMLInputElement;
  const runButton = metricsPanel.querySelector("button") as HTMLButtonElement;
  const metricsOutput = metricsPanel.querySelector(".output") as HTMLElement;
  runButton.addEventListener("click", () => void (async () => {
    try {
      const result = await api.runExperiment({ goal: goalInput.value, runs: 10 });
      renderMetrics(
        metricsOutput,
        result.stats,
        result.histogram_csv === null ? null : parseHistogramCsv(result.histogram_csv),
      );
    } catch (error) {
      showError(error);
    }
  })());

  redraw();
}

main();
