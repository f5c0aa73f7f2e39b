/** Typed client for the service JSON API.  All console mutations go
 * through this module; nothing else talks to the network. */

export type Phase =
  | "defined" | "translated" | "compiled" | "planned" | "executing" | "done";

export interface ApiErrorDetail {
  code: string;
  message: string;
  [extra: string]: unknown;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: ApiErrorDetail) {
    super(`${detail.code}: ${detail.message}`);
    this.name = "ApiError";
  }
}

export interface Candidate {
  identifier: string;
  score: number;
}

export interface DomainRegistered {
  domain_id: string;
}

export interface SessionCreated {
  session_id: string;
  phase: Phase;
}

export interface SessionSummary {
  session_id: string;
  phase: Phase;
  domain_id: string;
  [extra: string]: unknown;
}

export interface Expression {
  text: string;
  offset: number;
}

export interface ActivityView {
  session_id: string;
  phase: Phase;
  formula: string;
  symbolic_formula: string | null;
  pattern: string | null;
  expressions: Expression[];
  bindings: Record<string, string>;
}

export interface PolicySummary {
  actions: number;
  tag: string;
}

export interface GraphNode {
  id: string;
  goal: boolean;
  initial: boolean;
}

export interface GraphEdge {
  source: string;
  action: string;
  outcome: number;
  target: string;
}

export interface PlanGraph {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface ConfirmView {
  session_id: string;
  phase: Phase;
  policy: PolicySummary;
  plan_graph: PlanGraph;
}

export interface OutcomeMenu {
  action: string;
  options: string[][];
}

export interface MenuResponse {
  session_id: string;
  phase: Phase;
  menu: OutcomeMenu;
}

export interface StepResult {
  session_id: string;
  phase: Phase;
  t: number;
  action: string;
  outcome_index: number;
  goal: boolean;
  state: string[];
  sync_actions: string[];
}

export type StepResponse = StepResult | MenuResponse;

export function isMenu(response: StepResponse): response is MenuResponse {
  return "menu" in response;
}

export interface Evaluation {
  soundness: number;
  completeness: number;
  flagged: boolean;
  notes: string[];
  predicted: string[];
}

export interface QueryResponse {
  session_id: string;
  phase: Phase;
  question: string;
  scenario: string;
  answer: string;
  evaluation: Evaluation;
}

export interface SessionEvent {
  seq: number;
  event: string;
  [extra: string]: unknown;
}

export interface TraceView {
  session_id: string;
  phase: Phase;
  t: number;
  trace: string[][];
  transitions: Array<{
    t: number;
    action: string;
    outcome_index: number;
    goal: boolean;
    state: string[];
  }>;
}

export interface ScenarioRow {
  scenario: string;
  category: string;
  runs: number;
  failures: number;
  mean_soundness: number;
  std_soundness: number;
  mean_completeness: number;
  std_completeness: number;
}

export interface ExperimentResult {
  stats: ScenarioRow[];
  table: string;
  histogram_csv: string | null;
}

export interface ExperimentRequest {
  goal: string;
  domain_id?: string;
  scenarios?: string[];
  runs?: number;
  seed?: number;
  loss_rate?: number;
  hallucination_rate?: number;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data: unknown = await response.json();
    if (!response.ok) {
      const detail = (data as { detail?: ApiErrorDetail }).detail
        ?? { code: "unknown", message: response.statusText };
      throw new ApiError(response.status, detail);
    }
    return data as T;
  }

  registerDomain(domain: string, problem: string): Promise<DomainRegistered> {
    return this.request("POST", "/domains", { domain, problem });
  }

  createSession(domainId: string): Promise<SessionCreated> {
    return this.request("POST", "/sessions", { domain_id: domainId });
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.request("GET", "/sessions");
  }

  submitSentence(sessionId: string, sentence: string): Promise<ActivityView> {
    return this.request("POST", `/sessions/${sessionId}/activity`, { sentence });
  }

  submitFormula(sessionId: string, formula: string): Promise<ActivityView> {
    return this.request("POST", `/sessions/${sessionId}/activity`, { formula });
  }

  confirm(sessionId: string): Promise<ConfirmView> {
    return this.request("POST", `/sessions/${sessionId}/confirm`, {});
  }

  step(sessionId: string, opts: { choice?: number; auto?: boolean } = {}): Promise<StepResponse> {
    return this.request("POST", `/sessions/${sessionId}/step`, opts);
  }

  query(sessionId: string, body: { question?: string; scenario?: string }): Promise<QueryResponse> {
    return this.request("POST", `/sessions/${sessionId}/query`, body);
  }

  trace(sessionId: string): Promise<TraceView> {
    return this.request("GET", `/sessions/${sessionId}/trace`);
  }

  events(sessionId: string, since: number): Promise<{ events: SessionEvent[] }> {
    return this.request("GET", `/sessions/${sessionId}/events?since=${since}`);
  }

  runExperiment(body: ExperimentRequest): Promise<ExperimentResult> {
    return this.request("POST", "/experiments", body);
  }
}
