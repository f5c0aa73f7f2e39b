/** Error-contract tests: grounding failures surface candidates for the
 * picker, and phase gates reject out-of-order operations. */

import { afterAll, beforeAll, expect, test } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import type { Candidate } from "../src/api.js";
import { oracleRerTable, startServer, type TestServer } from "./server.js";

let server: TestServer;

beforeAll(async () => {
  // Extend the stock oracle table with a sentence whose only referring
  // expression cannot be grounded against any landmark.
  const table = oracleRerTable();
  table["visit zorgon prime"] = ["zorgon prime"];
  server = await startServer({ rerTable: table });
});

afterAll(() => {
  server.stop();
});

async function expectApiError(run: () => Promise<unknown>): Promise<ApiError> {
  try {
    await run();
  } catch (error) {
    if (error instanceof ApiError) return error;
    throw error;
  }
  throw new Error("expected the call to fail");
}

test("unresolved grounding returns candidates for the picker", async () => {
  const api = new ApiClient(server.url);
  const { domain_id } = await api.registerDomain(server.domainText, server.problemText);
  const session = await api.createSession(domain_id);

  const error = await expectApiError(
    () => api.submitSentence(session.session_id, "visit zorgon prime"));
  expect(error.status).toBe(400);
  expect(error.detail.code).toBe("unresolved-symbol");
  expect(error.detail["expression"]).toBe("zorgon prime");
  const candidates = error.detail["candidates"] as Candidate[];
  expect(candidates.length).toBeGreaterThan(0);
  for (const candidate of candidates) {
    expect(typeof candidate.identifier).toBe("string");
    expect(typeof candidate.score).toBe("number");
  }

  // The picker hands the operator an identifier to build a formula with;
  // submitting it as an explicit activity recovers the session.
  const picked = candidates[0]?.identifier as string;
  const view = await api.submitFormula(session.session_id, `F ${picked}`);
  expect(view.phase).toBe("translated");
});

test("phase gates reject out-of-order operations", async () => {
  const api = new ApiClient(server.url);
  const { domain_id } = await api.registerDomain(server.domainText, server.problemText);
  const session = await api.createSession(domain_id);

  const step = await expectApiError(() => api.step(session.session_id));
  expect(step.status).toBe(409);
  expect(step.detail.code).toBe("wrong-phase");
  expect(step.detail["phase"]).toBe("defined");

  const confirm = await expectApiError(() => api.confirm(session.session_id));
  expect(confirm.status).toBe(409);
  expect(confirm.detail.code).toBe("wrong-phase");
});

test("formula syntax errors are machine-readable", async () => {
  const api = new ApiClient(server.url);
  const { domain_id } = await api.registerDomain(server.domainText, server.problemText);
  const session = await api.createSession(domain_id);

  const error = await expectApiError(
    () => api.submitFormula(session.session_id, "F ???"));
  expect(error.status).toBe(400);
  expect(error.detail.code).toBe("formula-syntax");
});
