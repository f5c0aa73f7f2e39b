/** Full operator walkthrough against a live service with mock backends:
 * define an activity, confirm its grounding, steer a nondeterministic
 * outcome by hand, question the robot in all three categories, and reach
 * the goal with a gap-free event stream. */

import { afterAll, beforeAll, expect, test } from "vitest";

import { ApiClient, isMenu } from "../src/api.js";
import type { MenuResponse, StepResult } from "../src/api.js";
import { ConsoleState } from "../src/state.js";
import { EventPoller } from "../src/poll.js";
import { layoutGraph } from "../src/graph.js";
import { startServer, type TestServer } from "./server.js";

let server: TestServer;

beforeAll(async () => {
  server = await startServer();
});

afterAll(() => {
  server.stop();
});

test("define, confirm, steer, question, finish", async () => {
  const api = new ApiClient(server.url);
  const state = new ConsoleState();
  const pollErrors: unknown[] = [];

  // -- define ----------------------------------------------------------------
  const { domain_id } = await api.registerDomain(server.domainText, server.problemText);
  const session = await api.createSession(domain_id);
  state.applySession(session);
  expect(state.phase).toBe("defined");

  const poller = new EventPoller(api, session.session_id, (events) => {
    state.ingest(events);
  }, (error) => pollErrors.push(error), 100);
  poller.start();

  const activity = await api.submitSentence(
    session.session_id, "keep an empty box until harvest the grapes");
  state.applyActivity(activity);
  expect(state.phase).toBe("translated");
  expect(activity.pattern).toBe("wait");
  expect(activity.formula).toBe("box_empty U harvest");
  expect(activity.expressions.map((e) => e.text))
    .toEqual(["an empty box", "harvest the grapes"]);
  expect(activity.symbolic_formula).toBe("a U b");

  // -- confirm grounding: compile + plan --------------------------------------
  const confirmed = await api.confirm(session.session_id);
  state.applyConfirm(confirmed);
  expect(state.phase).toBe("planned");
  expect(confirmed.policy.tag).toBe("strong-cyclic");
  expect(confirmed.policy.actions).toBeGreaterThan(0);

  const layout = layoutGraph(confirmed.plan_graph);
  expect(layout.nodes.some((n) => n.goal)).toBe(true);
  const initial = layout.nodes.filter((n) => n.initial);
  expect(initial).toHaveLength(1);
  expect(initial[0]?.layer).toBe(0);
  const ids = new Set(layout.nodes.map((n) => n.id));
  for (const edge of layout.edges) {
    expect(ids.has(edge.source)).toBe(true);
    expect(ids.has(edge.target)).toBe(true);
  }

  // -- step: first action is deterministic ------------------------------------
  const first = await api.step(session.session_id);
  expect(isMenu(first)).toBe(false);
  state.applyStep(first);
  expect(state.phase).toBe("executing");
  expect(state.menu).toBeNull();
  expect((first as StepResult).action).toBe("(move l0 l1)");

  // -- steer: checking the grape offers ripe / unripe / unknown ---------------
  const offered = await api.step(session.session_id);
  expect(isMenu(offered)).toBe(true);
  const menu = (offered as MenuResponse).menu;
  expect(menu.action).toBe("(check-grape g1 l1)");
  expect(menu.options).toEqual([["(ripe g1)"], ["(unripe g1)"], ["(unknown g1)"]]);
  state.applyStep(offered);
  expect(state.menu).not.toBeNull();

  // The menu is a pure peek: asking again offers the same choice.
  const again = await api.step(session.session_id);
  expect(again).toEqual(offered);

  const chosen = await api.step(session.session_id, { choice: 1 });
  expect(isMenu(chosen)).toBe(false);
  state.applyStep(chosen);
  expect(state.menu).toBeNull();
  expect((chosen as StepResult).outcome_index).toBe(1);
  expect((chosen as StepResult).state).toContain("(unripe g1)");
  const lastStep = state.timeline[state.timeline.length - 1];
  expect(lastStep?.added).toContain("(unripe g1)");
  expect(lastStep?.removed).toContain("(unchecked g1)");

  // -- run to the goal --------------------------------------------------------
  let guard = 0;
  while (state.phase !== "done") {
    const result = await api.step(session.session_id, { auto: true });
    state.applyStep(result);
    expect(++guard).toBeLessThan(60);
  }
  const final = state.timeline[state.timeline.length - 1];
  expect(final?.goal).toBe(true);

  const trace = await api.trace(session.session_id);
  expect(trace.phase).toBe("done");
  expect(trace.trace).toHaveLength(trace.t);
  expect(trace.transitions.length).toBe(trace.t - 1);

  // -- question the robot in all three categories -----------------------------
  const categories: Array<[string, string]> = [
    ["What are you doing now?", "present"],
    ["What did you do so far?", "past"],
    ["What are you going to do next?", "future"],
  ];
  for (const [question, scenario] of categories) {
    const reply = await api.query(session.session_id, { question });
    state.applyQuery(reply);
    expect(reply.scenario).toBe(scenario);
    expect(reply.answer.length).toBeGreaterThan(0);
    expect(reply.evaluation.soundness).toBeGreaterThanOrEqual(0);
    expect(reply.evaluation.soundness).toBeLessThanOrEqual(1);
    expect(reply.evaluation.completeness).toBeGreaterThanOrEqual(0);
    expect(reply.evaluation.completeness).toBeLessThanOrEqual(1);
    if (scenario === "present") {
      expect(reply.evaluation.soundness).toBe(1);
      expect(reply.evaluation.completeness).toBe(1);
    }
  }

  // -- event stream is gap-free and carries the whole story -------------------
  await poller.tick();
  poller.stop();
  expect(pollErrors).toEqual([]);
  expect(state.events.map((e) => e.seq))
    .toEqual(state.events.map((_, i) => i + 1));
  const kinds = new Set(state.events.map((e) => e.event));
  for (const expected of ["created", "activity", "compiled", "plan-ready", "step", "query", "done"]) {
    expect(kinds.has(expected)).toBe(true);
  }

  expect(state.chat).toHaveLength(3);
  const order = state.chat.map((entry) => entry.seq);
  expect([...order].sort((a, b) => a - b)).toEqual(order);
  expect(state.chat.map((entry) => entry.scenario))
    .toEqual(["present", "past", "future"]);
  for (const entry of state.chat) {
    expect(Number.isFinite(entry.soundness)).toBe(true);
    expect(Number.isFinite(entry.completeness)).toBe(true);
  }
});

test("explicit formula entry skips extraction", async () => {
  const api = new ApiClient(server.url);
  const { domain_id } = await api.registerDomain(server.domainText, server.problemText);
  const session = await api.createSession(domain_id);
  const view = await api.submitFormula(session.session_id, "F robot_at_loc_l1");
  expect(view.pattern).toBeNull();
  expect(view.symbolic_formula).toBeNull();
  expect(view.expressions).toEqual([]);
  expect(view.formula).toBe("F robot_at_loc_l1");
});

test("experiment endpoint feeds the metrics panel", async () => {
  const api = new ApiClient(server.url);
  const result = await api.runExperiment({ goal: "true", runs: 3 });
  expect(result.stats).toHaveLength(3);
  for (const row of result.stats) {
    expect(row.runs).toBe(3);
    expect(row.mean_soundness).toBe(1);
    expect(row.mean_completeness).toBe(1);
  }
  expect(result.table).toContain("runs");
});
