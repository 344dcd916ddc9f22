/**
 * View models for the operator console.
 *
 * Pure functions from validated wire payloads to renderable structures.
 * Nothing here computes a verdict or a score: every number and boolean
 * shown to the operator is copied from a service response. The decimal
 * string travels as-is for display and the exact num/den pair becomes the
 * hover tooltip, so the console never does arithmetic that could drift
 * from the engine.
 */

import type {
  ConcernDecl,
  ConcernVerdict,
  HistoryEntry,
  LosResponse,
  MitigateResponse,
  Rational,
  StateDoc,
  TrustResponse,
} from "./schemas.js";

// ---------------------------------------------------------------------------
// Rational display

/** A rational ready for rendering: wire decimal plus exact tooltip. */
export interface RatDisplay {
  /** The service-provided decimal string, shown verbatim. */
  text: string;
  /** Exact value as "num/den", shown on hover. */
  exact: string;
}

export function ratDisplay(r: Rational): RatDisplay {
  return { text: r.decimal, exact: `${r.num}/${r.den}` };
}

// ---------------------------------------------------------------------------
// Concern tree

/** One node of the rendered concern forest. */
export interface ConcernNode {
  id: string;
  isAspect: boolean;
  /** Verdict row from the last satisfaction query, if one is loaded. */
  verdict: ConcernVerdict | null;
  /** True when a baseline is supplied and the satisfied flag differs. */
  changed: boolean;
  children: ConcernNode[];
}

/**
 * Build the concern forest from the declarations in the theory document.
 * Roots are concerns that no other concern lists as a subconcern, in
 * declaration order. A concern shared by several parents appears under
 * each of them. The optional verdict map decorates nodes; the optional
 * baseline map marks nodes whose satisfied flag flipped, which is how the
 * what-if overlay highlights the blast radius of an override.
 */
export function buildConcernForest(
  concerns: ConcernDecl[],
  verdicts: Record<string, ConcernVerdict> | null = null,
  baseline: Record<string, ConcernVerdict> | null = null,
): ConcernNode[] {
  const byId = new Map<string, ConcernDecl>();
  const referenced = new Set<string>();
  for (const decl of concerns) {
    byId.set(decl.id, decl);
    for (const sub of decl.subconcerns ?? []) {
      referenced.add(sub);
    }
  }

  const build = (id: string, path: Set<string>): ConcernNode => {
    const decl = byId.get(id);
    const verdict = verdicts?.[id] ?? null;
    const base = baseline?.[id] ?? null;
    const node: ConcernNode = {
      id,
      isAspect: decl?.is_aspect ?? false,
      verdict,
      changed: verdict !== null && base !== null && verdict.satisfied !== base.satisfied,
      children: [],
    };
    if (decl && !path.has(id)) {
      const deeper = new Set(path);
      deeper.add(id);
      node.children = (decl.subconcerns ?? []).map((sub) => build(sub, deeper));
    }
    return node;
  };

  return concerns
    .filter((decl) => !referenced.has(decl.id))
    .map((decl) => build(decl.id, new Set()));
}

/** Roll-up shown in the tree header. */
export interface SatisfactionSummary {
  total: number;
  satisfiedCount: number;
  unsatisfied: string[];
}

export function summarizeVerdicts(verdicts: Record<string, ConcernVerdict>): SatisfactionSummary {
  const ids = Object.keys(verdicts).sort();
  const unsatisfied = ids.filter((id) => !verdicts[id].satisfied);
  return {
    total: ids.length,
    satisfiedCount: ids.length - unsatisfied.length,
    unsatisfied,
  };
}

// ---------------------------------------------------------------------------
// What-if overlay

/** One concern whose satisfied flag flipped under the overrides. */
export interface VerdictFlip {
  id: string;
  was: boolean;
  now: boolean;
}

/** Rendered result of a non-mutating what-if probe. */
export interface WhatIfDiff {
  overrides: string[];
  flips: VerdictFlip[];
  forest: ConcernNode[];
}

export function buildWhatIfDiff(
  concerns: ConcernDecl[],
  baseline: Record<string, ConcernVerdict>,
  probed: Record<string, ConcernVerdict>,
  overrides: string[],
): WhatIfDiff {
  const flips: VerdictFlip[] = [];
  for (const id of Object.keys(probed).sort()) {
    const before = baseline[id];
    if (before !== undefined && before.satisfied !== probed[id].satisfied) {
      flips.push({ id, was: before.satisfied, now: probed[id].satisfied });
    }
  }
  return {
    overrides: [...overrides],
    flips,
    forest: buildConcernForest(concerns, probed, baseline),
  };
}

// ---------------------------------------------------------------------------
// State diffs

/** Atoms that changed truth value between two states. */
export interface StateDiff {
  gained: string[];
  lost: string[];
}

export function diffStates(before: StateDoc, after: StateDoc): StateDiff {
  const beforeTrue = new Set(before.true);
  const afterTrue = new Set(after.true);
  return {
    gained: after.true.filter((atom) => !beforeTrue.has(atom)),
    lost: before.true.filter((atom) => !afterTrue.has(atom)),
  };
}

// ---------------------------------------------------------------------------
// Mitigation plan cards

/** Stable identity of a plan inside one response: its action sequence. */
export function planKey(actions: string[]): string {
  return JSON.stringify(actions);
}

/** One renderable plan card. */
export interface PlanCard {
  index: number;
  actions: string[];
  /** "do nothing" for the empty plan, otherwise the actions joined. */
  label: string;
  outcomeCount: number;
  /** Policy score copied from the scoreboard; vectors come from the
   * lexicographic policy. Null when the response was search-only. */
  score: RatDisplay | RatDisplay[] | null;
  /** True only when the service lists this plan under "best". */
  best: boolean;
}

export function planLabel(actions: string[]): string {
  return actions.length === 0 ? "do nothing" : actions.join(" ; ");
}

/**
 * Turn a mitigation response into cards. Scores and best badges are taken
 * from the scoreboard and best arrays when the query asked for a policy;
 * the console never ranks plans itself.
 */
export function buildPlanCards(response: MitigateResponse): PlanCard[] {
  const scores = new Map<string, RatDisplay | RatDisplay[]>();
  for (const entry of response.scoreboard ?? []) {
    const value = Array.isArray(entry.score)
      ? entry.score.map(ratDisplay)
      : ratDisplay(entry.score);
    scores.set(planKey(entry.actions), value);
  }
  const bestKeys = new Set((response.best ?? []).map(planKey));
  return response.plans.map((plan, index) => ({
    index,
    actions: [...plan.actions],
    label: planLabel(plan.actions),
    outcomeCount: plan.final_states.length,
    score: scores.get(planKey(plan.actions)) ?? null,
    best: bestKeys.has(planKey(plan.actions)),
  }));
}

/** Actions of the cards the operator ticked, in card order. */
export function shortlistedPlans(cards: PlanCard[], selected: Set<string>): string[][] {
  return cards
    .filter((card) => selected.has(planKey(card.actions)))
    .map((card) => [...card.actions]);
}

// ---------------------------------------------------------------------------
// Branch choice dialog

/** One candidate final state of an ambiguous apply. */
export interface BranchChoice {
  index: number;
  /** Atoms true in this branch but not in the reference state. */
  gained: string[];
  /** Atoms true in the reference state but not in this branch. */
  lost: string[];
  trueCount: number;
}

/**
 * Describe the branches embedded in a BRANCH_AMBIGUOUS error envelope.
 * With a reference state (normally the session state the plan started
 * from) each choice is shown as a diff, which is far easier to scan than
 * two full atom lists that differ in one battery mode.
 */
export function buildBranchChoices(branches: StateDoc[], reference: StateDoc | null): BranchChoice[] {
  return branches.map((branch, index) => {
    if (reference === null) {
      return { index, gained: [...branch.true], lost: [], trueCount: branch.true.length };
    }
    const diff = diffStates(reference, branch);
    return { index, gained: diff.gained, lost: diff.lost, trueCount: branch.true.length };
  });
}

// ---------------------------------------------------------------------------
// Trust table

/** One row of the component trust table, in ranking order. */
export interface TrustRow {
  component: string;
  posPairs: number;
  nposPairs: number;
  tw: RatDisplay;
  impact: number;
  /** 1-based position of the component's ranking group. */
  rank: number;
  most: boolean;
  least: boolean;
}

export function buildTrustRows(response: TrustResponse): TrustRow[] {
  const scoreByComponent = new Map(response.scores.map((s) => [s.component, s]));
  const most = new Set(response.most);
  const least = new Set(response.least);
  const rows: TrustRow[] = [];
  response.ranking.forEach((group, groupIndex) => {
    for (const component of group) {
      const score = scoreByComponent.get(component);
      if (score === undefined) {
        continue;
      }
      rows.push({
        component,
        posPairs: score.pos_pairs,
        nposPairs: score.npos_pairs,
        tw: ratDisplay(score.tw),
        impact: score.impact,
        rank: groupIndex + 1,
        most: most.has(component),
        least: least.has(component),
      });
    }
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Satisfaction-degree table

/** One row of the per-concern degree table, sorted by concern id. */
export interface DegreeRow {
  concern: string;
  degPos: RatDisplay;
  los: RatDisplay;
  /** Aspect weight used by the weighted aggregate, when declared. */
  weight: RatDisplay | null;
}

export function buildDegreeRows(response: LosResponse): DegreeRow[] {
  return Object.keys(response.table)
    .sort()
    .map((concern) => ({
      concern,
      degPos: ratDisplay(response.table[concern].deg_pos),
      los: ratDisplay(response.table[concern].los),
      weight: concern in response.weights ? ratDisplay(response.weights[concern]) : null,
    }));
}

/** Lexicographic vector paired with its priority order, when requested. */
export interface LexEntry {
  concern: string;
  value: RatDisplay;
}

export function buildLexEntries(response: LosResponse): LexEntry[] | null {
  if (response.priority === undefined || response.lex_vector === undefined) {
    return null;
  }
  return response.priority.map((concern, i) => ({
    concern,
    value: ratDisplay(response.lex_vector![i]),
  }));
}

// ---------------------------------------------------------------------------
// History

/** One human-readable line per committed apply. */
export function describeHistory(entries: HistoryEntry[]): string[] {
  return entries.map((entry, index) => {
    const plan = planLabel(entry.actions);
    const overrides = entry.set.length > 0 ? ` with overrides ${entry.set.join(", ")}` : "";
    const branch = entry.branch > 0 ? ` (branch ${entry.branch})` : "";
    return `${index + 1}. ${plan}${overrides}${branch}`;
  });
}

// ---------------------------------------------------------------------------
// Override toggles

/** Tri-state override selection for one atom. */
export type ToggleValue = "on" | "off" | null;

/**
 * Convert the operator's toggle selections into the wire literal list:
 * "atom" forces an atom true and "-atom" forces it false, matching the
 * literal syntax the service parses. Atoms left untouched are omitted.
 */
export function overridesFromToggles(toggles: Map<string, ToggleValue>): string[] {
  const out: string[] = [];
  for (const [atom, value] of toggles) {
    if (value === "on") {
      out.push(atom);
    } else if (value === "off") {
      out.push(`-${atom}`);
    }
  }
  return out.sort();
}

/** All atoms of a state doc in render order: true atoms first. */
export function atomInventory(state: StateDoc): { atom: string; value: boolean }[] {
  return [
    ...state.true.map((atom) => ({ atom, value: true })),
    ...state.false.map((atom) => ({ atom, value: false })),
  ];
}
