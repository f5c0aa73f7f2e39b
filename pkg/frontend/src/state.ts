/** Console view model.  Holds only server-confirmed state: every field is
 * written from an API response or a polled event, never speculatively. */

import type {
  ActivityView, ConfirmView, Phase, PlanGraph, PolicySummary, OutcomeMenu,
  QueryResponse, SessionCreated, SessionEvent, StepResponse,
} from "./api.js";
import { isMenu } from "./api.js";

export class EventGapError extends Error {
  constructor(expected: number, got: number) {
    super(`event gap: expected seq ${expected}, got ${got}`);
    this.name = "EventGapError";
  }
}

export interface ChatEntry {
  seq: number;
  question: string;
  scenario: string;
  answer: string;
  soundness: number;
  completeness: number;
}

export interface TimelineStep {
  t: number;
  action: string;
  outcome: number;
  goal: boolean;
  state: string[];
  added: string[];
  removed: string[];
}

export function fluentDiff(previous: string[], next: string[]): { added: string[]; removed: string[] } {
  const before = new Set(previous);
  const after = new Set(next);
  return {
    added: next.filter((f) => !before.has(f)),
    removed: previous.filter((f) => !after.has(f)),
  };
}

export class ConsoleState {
  sessionId: string | null = null;
  phase: Phase = "defined";
  sentence = "";
  activity: ActivityView | null = null;
  policy: PolicySummary | null = null;
  graph: PlanGraph | null = null;
  menu: OutcomeMenu | null = null;
  currentState: string[] = [];
  timeline: TimelineStep[] = [];
  chat: ChatEntry[] = [];
  events: SessionEvent[] = [];

  private nextSeq = 1;

  applySession(created: SessionCreated): void {
    this.sessionId = created.session_id;
    this.phase = created.phase;
  }

  applyActivity(view: ActivityView): void {
    this.activity = view;
    this.phase = view.phase;
  }

  applyConfirm(view: ConfirmView): void {
    this.policy = view.policy;
    this.graph = view.plan_graph;
    this.phase = view.phase;
  }

  applyStep(response: StepResponse): void {
    this.phase = response.phase;
    if (isMenu(response)) {
      this.menu = response.menu;
      return;
    }
    this.menu = null;
    const previous = this.currentState;
    this.currentState = response.state;
    const { added, removed } = fluentDiff(previous, response.state);
    this.timeline.push({
      t: response.t,
      action: response.action,
      outcome: response.outcome_index,
      goal: response.goal,
      state: response.state,
      added,
      removed,
    });
  }

  applyQuery(response: QueryResponse): void {
    this.phase = response.phase;
  }

  /** Ingest a polled event batch; the rendered sequence must be gap-free. */
  ingest(batch: SessionEvent[]): void {
    for (const event of batch) {
      if (event.seq !== this.nextSeq) {
        throw new EventGapError(this.nextSeq, event.seq);
      }
      this.nextSeq = event.seq + 1;
      this.events.push(event);
      if (event.event === "query") {
        this.chat.push({
          seq: event.seq,
          question: String(event["question"] ?? ""),
          scenario: String(event["scenario"] ?? ""),
          answer: String(event["answer"] ?? ""),
          soundness: Number(event["soundness"] ?? NaN),
          completeness: Number(event["completeness"] ?? NaN),
        });
      }
    }
  }

  get lastSeq(): number {
    return this.nextSeq - 1;
  }
}
