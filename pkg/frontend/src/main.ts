/**
 * Operator console controller.
 *
 * Wires the DOM to the API client and the view models. The intended flow
 * mirrors how an operator works an incident: connect to a session, read
 * the concern tree under the chosen evaluation mode, probe overrides with
 * non-mutating what-if queries, search for mitigation plans, shortlist a
 * few, re-score the shortlist under a policy, then apply the preferred
 * plan. An ambiguous apply opens a branch dialog built from the candidate
 * states the service embeds in its error envelope.
 */

import { ConsoleClient, ServiceError } from "./api.js";
import type {
  ConcernDecl,
  ConcernVerdict,
  EvaluationMode,
  StateDoc,
} from "./schemas.js";
import {
  atomInventory,
  buildBranchChoices,
  buildConcernForest,
  buildDegreeRows,
  buildLexEntries,
  buildPlanCards,
  buildTrustRows,
  buildWhatIfDiff,
  describeHistory,
  overridesFromToggles,
  planKey,
  shortlistedPlans,
  summarizeVerdicts,
} from "./viewmodel.js";
import type { PlanCard, ToggleValue } from "./viewmodel.js";
import {
  branchChoicesHtml,
  concernForestHtml,
  degreeTableHtml,
  errorHtml,
  flipsHtml,
  historyHtml,
  planCardsHtml,
  stateHtml,
  summaryHtml,
  togglesHtml,
  trustTableHtml,
} from "./render.js";

const $ = <T extends HTMLElement>(sel: string, ctx: ParentNode = document): T => {
  const node = ctx.querySelector(sel);
  if (node === null) {
    throw new Error(`missing element: ${sel}`);
  }
  return node as T;
};

/** Everything the controller needs to redraw any panel. */
interface ConsoleState {
  client: ConsoleClient | null;
  sessionId: string | null;
  concerns: ConcernDecl[];
  mode: EvaluationMode;
  currentState: StateDoc | null;
  baselineVerdicts: Record<string, ConcernVerdict> | null;
  toggles: Map<string, ToggleValue>;
  cards: PlanCard[];
  shortlist: Set<string>;
  rescored: boolean;
  pendingApply: { plan: string[]; set: string[] } | null;
}

const state: ConsoleState = {
  client: null,
  sessionId: null,
  concerns: [],
  mode: "grounded",
  currentState: null,
  baselineVerdicts: null,
  toggles: new Map(),
  cards: [],
  shortlist: new Set(),
  rescored: false,
  pendingApply: null,
};

// ---------------------------------------------------------------------------
// Status line and error reporting

function note(text: string): void {
  $("#status").textContent = text;
}

function showError(err: unknown): void {
  const box = $("#error");
  if (err instanceof ServiceError) {
    box.innerHTML = errorHtml(err.code, err.envelope.error.message);
  } else {
    box.innerHTML = errorHtml("CLIENT", err instanceof Error ? err.message : String(err));
  }
  box.hidden = false;
}

function clearError(): void {
  const box = $("#error");
  box.hidden = true;
  box.innerHTML = "";
}

async function guarded(work: () => Promise<void>): Promise<void> {
  clearError();
  try {
    await work();
  } catch (err) {
    showError(err);
  }
}

function needSession(): { client: ConsoleClient; sessionId: string } {
  if (state.client === null || state.sessionId === null) {
    throw new Error("connect to a session first");
  }
  return { client: state.client, sessionId: state.sessionId };
}

// ---------------------------------------------------------------------------
// Connection and session selection

async function connect(): Promise<void> {
  const base = $<HTMLInputElement>("#service-url").value.trim();
  state.client = new ConsoleClient(base, (record) => {
    note(`${record.method} ${record.path} -> ${record.status} in ${record.ms.toFixed(0)} ms`);
  });
  const sessions = await state.client.listSessions();
  const picker = $<HTMLSelectElement>("#session-picker");
  picker.innerHTML = sessions
    .map((id) => `<option value="${id}">${id}</option>`)
    .join("");
  picker.disabled = sessions.length === 0;
  $<HTMLButtonElement>("#open-session").disabled = sessions.length === 0;
  note(sessions.length === 0
    ? "connected; no sessions yet, paste a theory document below"
    : `connected; ${sessions.length} session(s) available`);
}

async function openSession(sessionId: string): Promise<void> {
  const client = state.client;
  if (client === null) {
    throw new Error("connect first");
  }
  const theory = await client.getTheory(sessionId);
  const snap = await client.getState(sessionId);
  state.sessionId = sessionId;
  state.concerns = theory.document.ontology.concerns;
  state.currentState = snap.state;
  state.baselineVerdicts = null;
  state.toggles = new Map();
  state.cards = [];
  state.shortlist = new Set();
  state.rescored = false;
  $("#session-label").textContent = `session ${sessionId}`;
  renderHistory(snap.history.length > 0 ? describeHistory(snap.history) : []);
  renderState();
  await refreshTree();
  note(`session ${sessionId} opened`);
}

async function createSession(): Promise<void> {
  const client = state.client;
  if (client === null) {
    throw new Error("connect first");
  }
  const raw = $<HTMLTextAreaElement>("#document-input").value;
  const document_ = JSON.parse(raw) as unknown;
  const created = await client.createSession(document_);
  await connect();
  await openSession(created.id);
}

// ---------------------------------------------------------------------------
// Concern tree

async function refreshTree(): Promise<void> {
  const { client, sessionId } = needSession();
  const response = await client.satisfaction(sessionId, { mode: state.mode });
  state.baselineVerdicts = response.concerns;
  state.currentState = response.state;
  const forest = buildConcernForest(state.concerns, response.concerns);
  $("#tree").innerHTML = concernForestHtml(forest);
  $("#tree-summary").innerHTML = summaryHtml(summarizeVerdicts(response.concerns));
  $("#tree-mode").textContent = `evaluation mode: ${response.evaluation_mode}`;
  renderState();
}

function renderState(): void {
  if (state.currentState === null) {
    return;
  }
  $("#state-view").innerHTML = stateHtml(atomInventory(state.currentState));
  $("#toggle-grid").innerHTML = togglesHtml(atomInventory(state.currentState), state.toggles);
}

// ---------------------------------------------------------------------------
// What-if overlay

function cycleToggle(atom: string): void {
  const current = state.toggles.get(atom) ?? null;
  const next: ToggleValue = current === null ? "on" : current === "on" ? "off" : null;
  if (next === null) {
    state.toggles.delete(atom);
  } else {
    state.toggles.set(atom, next);
  }
  renderState();
}

async function runWhatIf(): Promise<void> {
  const { client, sessionId } = needSession();
  if (state.baselineVerdicts === null) {
    await refreshTree();
  }
  const overrides = overridesFromToggles(state.toggles);
  if (overrides.length === 0) {
    note("toggle at least one atom to probe a what-if");
    return;
  }
  const probe = await client.whatIf(sessionId, { set: overrides, mode: state.mode });
  const diff = buildWhatIfDiff(state.concerns, state.baselineVerdicts!, probe.concerns, overrides);
  $("#whatif-flips").innerHTML = flipsHtml(diff.flips);
  $("#whatif-tree").innerHTML = concernForestHtml(diff.forest);
  $("#whatif-note").textContent =
    `probed ${overrides.join(", ")} under ${probe.evaluation_mode}; the session state is unchanged`;
}

// ---------------------------------------------------------------------------
// Mitigation search, shortlist, re-score, apply

function selectedConcerns(): string[] {
  const field = $<HTMLInputElement>("#mitigate-concerns").value;
  return field.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
}

function renderCards(): void {
  $("#plan-cards").innerHTML = planCardsHtml(state.cards, state.shortlist, state.rescored);
  $<HTMLButtonElement>("#rescore").disabled = state.shortlist.size === 0;
}

async function searchPlans(): Promise<void> {
  const { client, sessionId } = needSession();
  const horizon = Number($<HTMLInputElement>("#mitigate-horizon").value);
  const overrides = overridesFromToggles(state.toggles);
  const response = await client.mitigate(sessionId, {
    concerns: selectedConcerns(),
    horizon,
    mode: state.mode,
    ...(overrides.length > 0 ? { set: overrides } : {}),
  });
  state.cards = buildPlanCards(response);
  state.shortlist = new Set();
  state.rescored = false;
  $("#mitigate-note").textContent =
    `${response.count} plan(s) within horizon ${response.horizon}; ` +
    "tick the ones worth scoring, then re-score the shortlist";
  renderCards();
}

async function rescoreShortlist(): Promise<void> {
  const { client, sessionId } = needSession();
  const plans = shortlistedPlans(state.cards, state.shortlist);
  if (plans.length === 0) {
    note("shortlist is empty");
    return;
  }
  const policy = $<HTMLSelectElement>("#policy-picker").value;
  const overrides = overridesFromToggles(state.toggles);
  const response = await client.mitigate(sessionId, {
    concerns: selectedConcerns(),
    plans,
    policy,
    mode: state.mode,
    ...(overrides.length > 0 ? { set: overrides } : {}),
  });
  state.cards = buildPlanCards(response);
  state.shortlist = new Set(state.cards.map((card) => planKey(card.actions)));
  state.rescored = true;
  const bestCount = state.cards.filter((card) => card.best).length;
  $("#mitigate-note").textContent =
    `shortlist scored under ${response.policy}; ${bestCount} plan(s) marked best by the service`;
  renderCards();
}

async function applyPlan(plan: string[], branch?: number): Promise<void> {
  const { client, sessionId } = needSession();
  const overrides = state.pendingApply?.set ?? overridesFromToggles(state.toggles);
  try {
    const response = await client.apply(sessionId, {
      plan,
      ...(overrides.length > 0 ? { set: overrides } : {}),
      ...(branch !== undefined ? { branch } : {}),
    });
    closeBranchDialog();
    state.pendingApply = null;
    state.toggles = new Map();
    state.currentState = response.state;
    note(`plan applied on branch ${response.branch} of ${response.branch_count}; ` +
      `history length ${response.history_length}`);
    const snap = await client.getState(sessionId);
    renderHistory(describeHistory(snap.history));
    await refreshTree();
  } catch (err) {
    if (err instanceof ServiceError && err.code === "BRANCH_AMBIGUOUS" && err.branches() !== null) {
      state.pendingApply = { plan, set: overrides };
      openBranchDialog(err.branches()!);
      return;
    }
    throw err;
  }
}

// ---------------------------------------------------------------------------
// Branch dialog

function openBranchDialog(branches: StateDoc[]): void {
  const choices = buildBranchChoices(branches, state.currentState);
  $("#branch-choices").innerHTML = branchChoicesHtml(choices);
  $<HTMLDialogElement>("#branch-dialog").showModal();
}

function closeBranchDialog(): void {
  const dialog = $<HTMLDialogElement>("#branch-dialog");
  if (dialog.open) {
    dialog.close();
  }
}

// ---------------------------------------------------------------------------
// Trust and degree panels

async function refreshTrust(): Promise<void> {
  const { client, sessionId } = needSession();
  const response = await client.trust(sessionId, { mode: state.mode });
  $("#trust-table").innerHTML = trustTableHtml(buildTrustRows(response));
}

async function refreshDegrees(): Promise<void> {
  const { client, sessionId } = needSession();
  const response = await client.los(sessionId, { mode: state.mode });
  $("#degree-table").innerHTML = degreeTableHtml(
    buildDegreeRows(response),
    { text: response.weighted.decimal, exact: `${response.weighted.num}/${response.weighted.den}` },
    buildLexEntries(response),
  );
}

function renderHistory(lines: string[]): void {
  $("#history").innerHTML = historyHtml(lines);
}

// ---------------------------------------------------------------------------
// Event wiring

function wire(): void {
  $<HTMLButtonElement>("#connect").addEventListener("click", () => {
    void guarded(connect);
  });
  $<HTMLButtonElement>("#open-session").addEventListener("click", () => {
    void guarded(() => openSession($<HTMLSelectElement>("#session-picker").value));
  });
  $<HTMLButtonElement>("#create-session").addEventListener("click", () => {
    void guarded(createSession);
  });
  $<HTMLSelectElement>("#mode-picker").addEventListener("change", (event) => {
    state.mode = (event.target as HTMLSelectElement).value as EvaluationMode;
    if (state.sessionId !== null) {
      void guarded(refreshTree);
    }
  });
  $("#toggle-grid").addEventListener("click", (event) => {
    const chip = (event.target as HTMLElement).closest<HTMLElement>(".chip");
    if (chip?.dataset.atom !== undefined) {
      cycleToggle(chip.dataset.atom);
    }
  });
  $<HTMLButtonElement>("#run-whatif").addEventListener("click", () => {
    void guarded(runWhatIf);
  });
  $<HTMLButtonElement>("#search-plans").addEventListener("click", () => {
    void guarded(searchPlans);
  });
  $<HTMLButtonElement>("#rescore").addEventListener("click", () => {
    void guarded(rescoreShortlist);
  });
  $("#plan-cards").addEventListener("change", (event) => {
    const box = event.target as HTMLInputElement;
    if (box.classList.contains("shortlist-box") && box.dataset.key !== undefined) {
      if (box.checked) {
        state.shortlist.add(box.dataset.key);
      } else {
        state.shortlist.delete(box.dataset.key);
      }
      $<HTMLButtonElement>("#rescore").disabled = state.shortlist.size === 0;
    }
  });
  $("#plan-cards").addEventListener("click", (event) => {
    const btn = (event.target as HTMLElement).closest<HTMLButtonElement>(".apply-btn");
    if (btn?.dataset.key !== undefined) {
      const actions = JSON.parse(btn.dataset.key) as string[];
      void guarded(() => applyPlan(actions));
    }
  });
  $("#branch-choices").addEventListener("click", (event) => {
    const btn = (event.target as HTMLElement).closest<HTMLButtonElement>(".branch-btn");
    if (btn?.dataset.branch !== undefined && state.pendingApply !== null) {
      const pending = state.pendingApply;
      void guarded(() => applyPlan(pending.plan, Number(btn.dataset.branch)));
    }
  });
  $<HTMLButtonElement>("#branch-cancel").addEventListener("click", () => {
    state.pendingApply = null;
    closeBranchDialog();
  });
  $<HTMLButtonElement>("#refresh-trust").addEventListener("click", () => {
    void guarded(refreshTrust);
  });
  $<HTMLButtonElement>("#refresh-degrees").addEventListener("click", () => {
    void guarded(refreshDegrees);
  });
}

document.addEventListener("DOMContentLoaded", wire);
