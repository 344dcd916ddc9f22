/**
 * View-model tests against recorded service responses.
 *
 * The files under tests/recorded/ are genuine wire payloads captured from
 * the in-process service (regenerate with `npm run record`). These tests
 * prove that every rendered figure is a verbatim copy of a wire value;
 * decimals in particular are compared as strings against the recorded
 * bodies, never recomputed.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  ErrorEnvelopeSchema,
  MitigateResponseSchema,
  NoncomplianceResponseSchema,
  LosResponseSchema,
  SatisfactionResponseSchema,
  SessionTheorySchema,
  TrustResponseSchema,
} from "../src/schemas.js";
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
  diffStates,
  overridesFromToggles,
  planKey,
  planLabel,
  ratDisplay,
  shortlistedPlans,
  summarizeVerdicts,
} from "../src/viewmodel.js";
import type { ToggleValue } from "../src/viewmodel.js";

const HERE = dirname(fileURLToPath(import.meta.url));

interface Recorded {
  method: string;
  path: string;
  status: number;
  body: unknown;
}

function recorded(name: string): Recorded {
  const text = readFileSync(join(HERE, "recorded", `${name}.json`), "utf8");
  return JSON.parse(text) as Recorded;
}

const theory = SessionTheorySchema.parse(recorded("theory").body);
const satisfied = SatisfactionResponseSchema.parse(recorded("satisfaction_grounded").body);
const attacked = SatisfactionResponseSchema.parse(recorded("satisfaction_attacked").body);
const whatIf = SatisfactionResponseSchema.parse(recorded("whatif_minus_basic").body);
const search = MitigateResponseSchema.parse(recorded("mitigate_search").body);
const shortlist = MitigateResponseSchema.parse(recorded("mitigate_shortlist").body);
const lexScored = MitigateResponseSchema.parse(recorded("mitigate_lexicographic").body);
const trustHealthy = TrustResponseSchema.parse(recorded("trust_healthy").body);
const trustAttacked = TrustResponseSchema.parse(recorded("trust_attacked").body);
const losPriority = LosResponseSchema.parse(recorded("los_priority").body);

describe("wire schemas", () => {
  it("accepts every recorded success payload", () => {
    expect(theory.engine_version).toBe(satisfied.engine_version);
    expect(NoncomplianceResponseSchema.parse(recorded("noncompliance_weak").body).verdict)
      .toBe(true);
  });

  it("accepts recorded error envelopes and exposes their codes", () => {
    const conflict = ErrorEnvelopeSchema.parse(recorded("branch_conflict").body);
    expect(recorded("branch_conflict").status).toBe(409);
    expect(conflict.error.code).toBe("BRANCH_AMBIGUOUS");
    expect(conflict.error.branches).toHaveLength(2);

    const bad = ErrorEnvelopeSchema.parse(recorded("bad_literal").body);
    expect(recorded("bad_literal").status).toBe(400);
    expect(bad.error.code).toBe("BAD_LITERAL");
  });

  it("rejects payloads that drop contract fields", () => {
    const broken = JSON.parse(JSON.stringify(recorded("satisfaction_grounded").body));
    delete broken.engine_version;
    expect(SatisfactionResponseSchema.safeParse(broken).success).toBe(false);

    const truncated = JSON.parse(JSON.stringify(recorded("trust_healthy").body));
    delete truncated.scores[0].tw.decimal;
    expect(TrustResponseSchema.safeParse(truncated).success).toBe(false);
  });
});

describe("rational display", () => {
  it("shows the wire decimal verbatim with the exact pair on hover", () => {
    const tw = trustHealthy.scores.find((s) => s.component === "cam")!.tw;
    const shown = ratDisplay(tw);
    expect(shown.text).toBe(tw.decimal);
    expect(shown.exact).toBe(`${tw.num}/${tw.den}`);
  });
});

describe("concern forest", () => {
  it("builds one root chain for the fixture ontology", () => {
    const forest = buildConcernForest(theory.document.ontology.concerns);
    expect(forest).toHaveLength(1);

    const root = forest[0];
    expect(root.id).toBe("trustworthiness");
    expect(root.isAspect).toBe(true);
    expect(root.verdict).toBeNull();

    const chain: string[] = [];
    for (let node = root; ; node = node.children[0]) {
      chain.push(node.id);
      if (node.children.length === 0) {
        break;
      }
    }
    expect(chain).toEqual(["trustworthiness", "security", "cybersecurity", "integrity"]);
  });

  it("decorates nodes with the recorded verdicts", () => {
    const forest = buildConcernForest(theory.document.ontology.concerns, satisfied.concerns);
    const root = forest[0];
    expect(root.verdict?.satisfied).toBe(true);
    expect(root.changed).toBe(false);

    const summary = summarizeVerdicts(satisfied.concerns);
    expect(summary.total).toBe(4);
    expect(summary.satisfiedCount).toBe(4);
    expect(summary.unsatisfied).toEqual([]);
  });

  it("summarizes the attacked session as fully unsatisfied", () => {
    const summary = summarizeVerdicts(attacked.concerns);
    expect(summary.satisfiedCount).toBe(0);
    expect(summary.unsatisfied).toEqual(
      ["cybersecurity", "integrity", "security", "trustworthiness"]);
  });

  it("repeats a shared subconcern under each parent without looping", () => {
    const declarations = [
      { id: "left", subconcerns: ["shared"] },
      { id: "right", subconcerns: ["shared"] },
      { id: "shared", subconcerns: [] },
    ];
    const forest = buildConcernForest(declarations);
    expect(forest.map((n) => n.id)).toEqual(["left", "right"]);
    expect(forest[0].children[0].id).toBe("shared");
    expect(forest[1].children[0].id).toBe("shared");
  });
});

describe("what-if overlay", () => {
  it("marks every flipped concern and keeps the override list", () => {
    const diff = buildWhatIfDiff(
      theory.document.ontology.concerns,
      satisfied.concerns,
      whatIf.concerns,
      ["-basic_mode"],
    );
    expect(diff.overrides).toEqual(["-basic_mode"]);
    expect(diff.flips.map((f) => f.id)).toEqual(
      ["cybersecurity", "integrity", "security", "trustworthiness"]);
    for (const flip of diff.flips) {
      expect(flip.was).toBe(true);
      expect(flip.now).toBe(false);
    }

    const root = diff.forest[0];
    expect(root.changed).toBe(true);
    expect(root.verdict?.satisfied).toBe(false);
  });

  it("reports no flips when the probe agrees with the baseline", () => {
    const diff = buildWhatIfDiff(
      theory.document.ontology.concerns,
      satisfied.concerns,
      satisfied.concerns,
      ["secure_boot"],
    );
    expect(diff.flips).toEqual([]);
    expect(diff.forest[0].changed).toBe(false);
  });
});

describe("plan cards", () => {
  it("renders one card per searched plan with no scores or badges", () => {
    const cards = buildPlanCards(search);
    expect(cards).toHaveLength(search.count);
    expect(cards).toHaveLength(21);
    for (const card of cards) {
      expect(card.score).toBeNull();
      expect(card.best).toBe(false);
    }
    const single = cards.find((card) => planKey(card.actions) === planKey(["tOn basic_mode"]))!;
    expect(single.label).toBe("tOn basic_mode");
    const pair = cards.find((card) =>
      planKey(card.actions) === planKey(["switM cam advanced_mode", "switM sam advanced_mode"]))!;
    expect(pair.label).toBe("switM cam advanced_mode ; switM sam advanced_mode");
  });

  it("copies shortlist scores verbatim and badges only the service's best", () => {
    const cards = buildPlanCards(shortlist);
    expect(cards).toHaveLength(5);

    const bestKeys = new Set(shortlist.best!.map((actions) => planKey(actions)));
    for (const card of cards) {
      expect(card.best).toBe(bestKeys.has(planKey(card.actions)));
      const wire = shortlist.scoreboard!.find(
        (entry) => planKey(entry.actions) === planKey(card.actions))!;
      const score = card.score!;
      if (!Array.isArray(score) && !Array.isArray(wire.score)) {
        expect(score.text).toBe(wire.score.decimal);
        expect(score.exact).toBe(`${wire.score.num}/${wire.score.den}`);
      }
    }

    const bestCards = cards.filter((card) => card.best);
    expect(bestCards).toHaveLength(2);
    for (const card of bestCards) {
      const score = card.score!;
      if (!Array.isArray(score)) {
        expect(score.text).toBe("0.42");
        expect(score.exact).toBe("21/50");
      }
    }
  });

  it("renders lexicographic scores as vectors of wire decimals", () => {
    const cards = buildPlanCards(lexScored);
    for (const card of cards) {
      const wire = lexScored.scoreboard!.find(
        (entry) => planKey(entry.actions) === planKey(card.actions))!;
      const score = card.score!;
      expect(Array.isArray(score)).toBe(true);
      expect(Array.isArray(wire.score)).toBe(true);
      if (Array.isArray(score) && Array.isArray(wire.score)) {
        expect(score.map((r) => r.text)).toEqual(wire.score.map((r) => r.decimal));
      }
    }
  });

  it("collects ticked cards into the re-score request in card order", () => {
    const cards = buildPlanCards(search);
    const picked = new Set([planKey(cards[3].actions), planKey(cards[11].actions)]);
    const plans = shortlistedPlans(cards, picked);
    expect(plans).toEqual([cards[3].actions, cards[11].actions]);
  });
});

describe("branch choices", () => {
  it("diffs each embedded candidate against the reference state", () => {
    const conflict = ErrorEnvelopeSchema.parse(recorded("branch_conflict").body);
    const attackedState = attacked.state;
    const choices = buildBranchChoices(conflict.error.branches!, attackedState);
    expect(choices.map((c) => c.index)).toEqual([0, 1]);

    // Branch 0 keeps the battery in powerful mode, so only the recovered
    // property shows up; branch 1 also swaps the battery to normal mode.
    expect(choices[0].gained).toEqual(["basic_mode"]);
    expect(choices[0].lost).toEqual([]);
    expect(choices[1].gained).toEqual(["active bat normal_mode", "basic_mode"]);
    expect(choices[1].lost).toEqual(["active bat powerful_mode"]);
  });

  it("falls back to full atom lists without a reference", () => {
    const conflict = ErrorEnvelopeSchema.parse(recorded("branch_conflict").body);
    const choices = buildBranchChoices(conflict.error.branches!, null);
    expect(choices[0].gained).toEqual(conflict.error.branches![0].true);
    expect(choices[0].lost).toEqual([]);
  });
});

describe("trust table", () => {
  it("orders rows by the recorded ranking and flags most and least", () => {
    const rows = buildTrustRows(trustHealthy);
    expect(rows.map((r) => r.component)).toEqual(["bat", "cam", "sam"]);
    expect(rows.map((r) => r.rank)).toEqual([1, 2, 2]);

    const bat = rows[0];
    expect(bat.most).toBe(true);
    expect(bat.least).toBe(false);
    expect(bat.posPairs).toBe(4);
    expect(bat.nposPairs).toBe(0);
    expect(bat.tw.exact).toBe("4/1");

    const cam = rows[1];
    expect(cam.least).toBe(true);
    expect(cam.tw.exact).toBe("4/5");
    expect(cam.tw.text).toBe(
      trustHealthy.scores.find((s) => s.component === "cam")!.tw.decimal);
  });

  it("collapses the attacked session into one all-equal group", () => {
    const rows = buildTrustRows(trustAttacked);
    expect(new Set(rows.map((r) => r.rank))).toEqual(new Set([1]));
    for (const row of rows) {
      expect(row.most).toBe(true);
      expect(row.least).toBe(true);
    }
  });
});

describe("degree table", () => {
  it("copies levels, weights and the lexicographic vector from the wire", () => {
    const rows = buildDegreeRows(losPriority);
    expect(rows.map((r) => r.concern)).toEqual(
      ["cybersecurity", "integrity", "security", "trustworthiness"]);
    for (const row of rows) {
      const wire = losPriority.table[row.concern];
      expect(row.degPos.text).toBe(wire.deg_pos.decimal);
      expect(row.los.text).toBe(wire.los.decimal);
    }
    const aspect = rows.find((r) => r.concern === "trustworthiness")!;
    expect(aspect.weight).not.toBeNull();

    const lex = buildLexEntries(losPriority)!;
    expect(lex.map((e) => e.concern)).toEqual(losPriority.priority);
    expect(lex.map((e) => e.value.text)).toEqual(
      losPriority.lex_vector!.map((r) => r.decimal));
  });
});

describe("state helpers", () => {
  it("diffs states and inventories atoms in true-first order", () => {
    const before = { true: ["a", "b"], false: ["c"] };
    const after = { true: ["b", "c"], false: ["a"] };
    expect(diffStates(before, after)).toEqual({ gained: ["c"], lost: ["a"] });

    const inventory = atomInventory(before);
    expect(inventory).toEqual([
      { atom: "a", value: true },
      { atom: "b", value: true },
      { atom: "c", value: false },
    ]);
  });

  it("turns toggle selections into wire literals", () => {
    const toggles = new Map<string, ToggleValue>([
      ["basic_mode", "off"],
      ["secure_boot", "on"],
      ["saving_mode", null],
    ]);
    expect(overridesFromToggles(toggles)).toEqual(["-basic_mode", "secure_boot"]);
  });
});

describe("history lines", () => {
  it("describes applied plans with their overrides and branch picks", () => {
    const lines = describeHistory([
      { set: [], actions: ["tOn basic_mode"], branch: 0 },
      { set: ["-basic_mode"], actions: [], branch: 0 },
      { set: [], actions: ["switM cam advanced_mode", "switM sam advanced_mode"], branch: 1 },
    ]);
    expect(lines[0]).toBe("1. tOn basic_mode");
    expect(lines[1]).toBe("2. do nothing with overrides -basic_mode");
    expect(lines[2]).toBe(
      "3. switM cam advanced_mode ; switM sam advanced_mode (branch 1)");
    expect(planLabel([])).toBe("do nothing");
  });
});
