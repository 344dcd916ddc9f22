/**
 * Wire schemas for the reasoning service.
 *
 * Every response the console consumes is validated here before any view
 * model touches it. The schemas mirror the service contract exactly:
 * rationals arrive as num/den pairs with a display decimal, and states
 * arrive as sorted true/false atom lists. Validation failures are bugs
 * (ours or the service's), so the API client turns them into loud errors
 * instead of rendering guesses.
 */

import { z } from "zod";

/**
 * Exact rational on the wire. Equality must use num/den; the decimal is
 * for display only and may be rounded.
 */
export const RationalSchema = z.object({
  num: z.number().int(),
  den: z.number().int().positive(),
  decimal: z.string().min(1),
});
export type Rational = z.infer<typeof RationalSchema>;

/**
 * Total state as two sorted atom lists. Atoms render as either a bare
 * property name ("basic_mode") or an activity triple ("active cam
 * advanced_mode").
 */
export const StateDocSchema = z.object({
  true: z.array(z.string()),
  false: z.array(z.string()),
});
export type StateDoc = z.infer<typeof StateDocSchema>;

export const EvaluationModeSchema = z.enum(["plain", "grounded"]);
export type EvaluationMode = z.infer<typeof EvaluationModeSchema>;

/** Per-concern verdict row inside satisfaction and what-if responses. */
export const ConcernVerdictSchema = z.object({
  satisfied: z.boolean(),
  formula_value: z.boolean(),
  failing_subconcerns: z.array(z.string()),
});
export type ConcernVerdict = z.infer<typeof ConcernVerdictSchema>;

/** Concern declaration inside the theory document. */
export const ConcernDeclSchema = z.object({
  id: z.string(),
  subconcerns: z.array(z.string()).optional(),
  is_aspect: z.boolean().optional(),
});
export type ConcernDecl = z.infer<typeof ConcernDeclSchema>;

/**
 * The slice of the theory document the console reads. Documents carry much
 * more (laws, actions, analysis defaults); the console never interprets
 * those itself, it always asks the service.
 */
export const TheoryDocumentSchema = z.object({
  ontology: z.object({
    concerns: z.array(ConcernDeclSchema),
    properties: z.array(z.string()),
  }),
});
export type TheoryDocument = z.infer<typeof TheoryDocumentSchema>;

// ---------------------------------------------------------------------------
// Session endpoints

export const SessionCreatedSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  id: z.string(),
  state: StateDocSchema,
});
export type SessionCreated = z.infer<typeof SessionCreatedSchema>;

export const SessionListSchema = z.object({
  engine_version: z.string(),
  sessions: z.array(z.string()),
});
export type SessionList = z.infer<typeof SessionListSchema>;

export const HistoryEntrySchema = z.object({
  set: z.array(z.string()),
  actions: z.array(z.string()),
  branch: z.number().int(),
});
export type HistoryEntry = z.infer<typeof HistoryEntrySchema>;

export const SessionStateSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  id: z.string(),
  state: StateDocSchema,
  history: z.array(HistoryEntrySchema),
});
export type SessionState = z.infer<typeof SessionStateSchema>;

export const SessionTheorySchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  document: TheoryDocumentSchema,
});
export type SessionTheory = z.infer<typeof SessionTheorySchema>;

// ---------------------------------------------------------------------------
// Query endpoints

export const SatisfactionResponseSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  state: StateDocSchema,
  concerns: z.record(z.string(), ConcernVerdictSchema),
});
export type SatisfactionResponse = z.infer<typeof SatisfactionResponseSchema>;

export const TrustScoreSchema = z.object({
  component: z.string(),
  pos_pairs: z.number().int(),
  npos_pairs: z.number().int(),
  tw: RationalSchema,
  impact: z.number().int(),
});
export type TrustScore = z.infer<typeof TrustScoreSchema>;

export const TrustResponseSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  state: StateDocSchema,
  scores: z.array(TrustScoreSchema),
  ranking: z.array(z.array(z.string())),
  most: z.array(z.string()),
  least: z.array(z.string()),
});
export type TrustResponse = z.infer<typeof TrustResponseSchema>;

export const LosRowSchema = z.object({
  deg_pos: RationalSchema,
  los: RationalSchema,
});

export const LosResponseSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  state: StateDocSchema,
  table: z.record(z.string(), LosRowSchema),
  weights: z.record(z.string(), RationalSchema),
  weighted: RationalSchema,
  priority: z.array(z.string()).optional(),
  lex_vector: z.array(RationalSchema).optional(),
});
export type LosResponse = z.infer<typeof LosResponseSchema>;

export const PlanDocSchema = z.object({
  actions: z.array(z.string()),
  final_states: z.array(StateDocSchema),
});
export type PlanDoc = z.infer<typeof PlanDocSchema>;

/** Weighted and probability policies score with one rational, the
 * lexicographic policy scores with a vector of them. */
export const ScoreDocSchema = z.union([RationalSchema, z.array(RationalSchema)]);
export type ScoreDoc = z.infer<typeof ScoreDocSchema>;

export const ScoreboardEntrySchema = z.object({
  actions: z.array(z.string()),
  score: ScoreDocSchema,
});
export type ScoreboardEntry = z.infer<typeof ScoreboardEntrySchema>;

export const MitigateResponseSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  concerns: z.array(z.string()),
  horizon: z.number().int().nullable(),
  minimal: z.boolean(),
  count: z.number().int(),
  plans: z.array(PlanDocSchema),
  policy: z.string().optional(),
  scoreboard: z.array(ScoreboardEntrySchema).optional(),
  best: z.array(z.array(z.string())).optional(),
});
export type MitigateResponse = z.infer<typeof MitigateResponseSchema>;

export const WitnessSchema = z.object({
  initial: StateDocSchema,
  plan: z.array(z.string()),
  violated_concern: z.string().nullable(),
});
export type Witness = z.infer<typeof WitnessSchema>;

export const NoncomplianceResponseSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  mode: z.enum(["weak", "strong"]),
  n: z.number().int(),
  sa: z.array(z.string()),
  sc: z.array(z.string()),
  verdict: z.boolean(),
  witness: WitnessSchema.nullable(),
});
export type NoncomplianceResponse = z.infer<typeof NoncomplianceResponseSchema>;

export const ApplyResponseSchema = z.object({
  engine_version: z.string(),
  evaluation_mode: EvaluationModeSchema,
  state: StateDocSchema,
  branch: z.number().int(),
  branch_count: z.number().int(),
  history_length: z.number().int(),
});
export type ApplyResponse = z.infer<typeof ApplyResponseSchema>;

// ---------------------------------------------------------------------------
// Error envelope

export const DiagnosticSchema = z.object({
  code: z.string(),
  args: z.array(z.unknown()),
  message: z.string(),
});
export type Diagnostic = z.infer<typeof DiagnosticSchema>;

/**
 * Every non-2xx response carries this envelope. An ambiguous apply embeds
 * the candidate final states under error.branches so the operator can pick
 * one; parse and validation failures embed diagnostics.
 */
export const ErrorEnvelopeSchema = z.object({
  engine_version: z.string(),
  error: z.object({
    code: z.string(),
    message: z.string(),
    diagnostics: z.array(DiagnosticSchema).optional(),
    branches: z.array(StateDocSchema).optional(),
  }),
});
export type ErrorEnvelope = z.infer<typeof ErrorEnvelopeSchema>;
