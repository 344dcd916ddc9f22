/**
 * HTML renderers for the operator console.
 *
 * Every function maps a view model to markup. All dynamic text passes
 * through escapeHtml, and rationals render their wire decimal with the
 * exact num/den pair in the title attribute. Renderers know nothing about
 * the service; they are fed by the controller in main.ts.
 */

import type {
  BranchChoice,
  ConcernNode,
  DegreeRow,
  LexEntry,
  PlanCard,
  RatDisplay,
  SatisfactionSummary,
  StateDiff,
  ToggleValue,
  TrustRow,
  VerdictFlip,
} from "./viewmodel.js";
import { planKey } from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Render a rational: decimal text, exact fraction on hover. */
export function ratHtml(r: RatDisplay): string {
  return `<span class="rat" title="${escapeHtml(r.exact)}">${escapeHtml(r.text)}</span>`;
}

function scoreHtml(score: RatDisplay | RatDisplay[] | null): string {
  if (score === null) {
    return "";
  }
  if (Array.isArray(score)) {
    return score.map(ratHtml).join('<span class="sep"> | </span>');
  }
  return ratHtml(score);
}

// ---------------------------------------------------------------------------
// Concern tree

function verdictBadge(node: ConcernNode): string {
  if (node.verdict === null) {
    return '<span class="badge badge-idle">no verdict</span>';
  }
  const cls = node.verdict.satisfied ? "badge-ok" : "badge-bad";
  const word = node.verdict.satisfied ? "satisfied" : "unsatisfied";
  return `<span class="badge ${cls}">${word}</span>`;
}

function concernNodeHtml(node: ConcernNode): string {
  const aspect = node.isAspect ? '<span class="badge badge-aspect">aspect</span>' : "";
  const changed = node.changed ? '<span class="badge badge-flip">changed</span>' : "";
  const failing = node.verdict !== null && node.verdict.failing_subconcerns.length > 0
    ? `<span class="failing">failing: ${node.verdict.failing_subconcerns.map(escapeHtml).join(", ")}</span>`
    : "";
  const children = node.children.length > 0
    ? `<ul>${node.children.map(concernNodeHtml).join("")}</ul>`
    : "";
  return `<li class="${node.changed ? "flipped" : ""}">` +
    `<span class="concern-id">${escapeHtml(node.id)}</span> ` +
    `${aspect}${verdictBadge(node)}${changed}${failing}${children}</li>`;
}

export function concernForestHtml(forest: ConcernNode[]): string {
  if (forest.length === 0) {
    return '<p class="empty">The theory declares no concerns.</p>';
  }
  return `<ul class="concern-tree">${forest.map(concernNodeHtml).join("")}</ul>`;
}

export function summaryHtml(summary: SatisfactionSummary): string {
  const state = summary.unsatisfied.length === 0 ? "badge-ok" : "badge-bad";
  const detail = summary.unsatisfied.length > 0
    ? ` <span class="failing">unsatisfied: ${summary.unsatisfied.map(escapeHtml).join(", ")}</span>`
    : "";
  return `<span class="badge ${state}">${summary.satisfiedCount}/${summary.total} satisfied</span>${detail}`;
}

export function flipsHtml(flips: VerdictFlip[]): string {
  if (flips.length === 0) {
    return '<p class="empty">No concern changes under these overrides.</p>';
  }
  const items = flips.map((flip) => {
    const was = flip.was ? "satisfied" : "unsatisfied";
    const now = flip.now ? "satisfied" : "unsatisfied";
    return `<li><span class="concern-id">${escapeHtml(flip.id)}</span> was ${was}, now ${now}</li>`;
  });
  return `<ul class="flips">${items.join("")}</ul>`;
}

// ---------------------------------------------------------------------------
// State views

export function stateHtml(atoms: { atom: string; value: boolean }[]): string {
  const rows = atoms.map(({ atom, value }) =>
    `<tr class="${value ? "atom-true" : "atom-false"}">` +
    `<td>${escapeHtml(atom)}</td><td>${value ? "true" : "false"}</td></tr>`);
  return `<table class="state-table"><thead><tr><th>atom</th><th>value</th></tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table>`;
}

export function diffHtml(diff: StateDiff): string {
  if (diff.gained.length === 0 && diff.lost.length === 0) {
    return '<p class="empty">No atom changed.</p>';
  }
  const gained = diff.gained.map((a) => `<li class="gained">+ ${escapeHtml(a)}</li>`);
  const lost = diff.lost.map((a) => `<li class="lost">- ${escapeHtml(a)}</li>`);
  return `<ul class="state-diff">${gained.join("")}${lost.join("")}</ul>`;
}

/** Tri-state toggle chips for what-if overrides. */
export function togglesHtml(
  atoms: { atom: string; value: boolean }[],
  toggles: Map<string, ToggleValue>,
): string {
  const chips = atoms.map(({ atom, value }) => {
    const forced = toggles.get(atom) ?? null;
    const cls = forced === "on" ? "chip-on" : forced === "off" ? "chip-off" : "chip-idle";
    const note = forced === null ? (value ? "true" : "false") : `forced ${forced}`;
    return `<button class="chip ${cls}" data-atom="${escapeHtml(atom)}">` +
      `${escapeHtml(atom)} <small>${note}</small></button>`;
  });
  return chips.join("");
}

// ---------------------------------------------------------------------------
// Plan cards

export function planCardsHtml(cards: PlanCard[], selected: Set<string>, applyEnabled: boolean): string {
  if (cards.length === 0) {
    return '<p class="empty">No plan reaches the requested concerns within this horizon.</p>';
  }
  const blocks = cards.map((card) => {
    const key = planKey(card.actions);
    const checked = selected.has(key) ? " checked" : "";
    const best = card.best ? '<span class="badge badge-best">best</span>' : "";
    const score = card.score !== null
      ? `<div class="score">score ${scoreHtml(card.score)}</div>`
      : "";
    const outcomes = card.outcomeCount === 1 ? "1 outcome" : `${card.outcomeCount} outcomes`;
    const apply = applyEnabled
      ? `<button class="apply-btn" data-key="${escapeHtml(key)}">apply</button>`
      : "";
    return `<div class="plan-card${card.best ? " plan-best" : ""}" data-key="${escapeHtml(key)}">` +
      `<label><input type="checkbox" class="shortlist-box" data-key="${escapeHtml(key)}"${checked}>` +
      ` <span class="plan-label">${escapeHtml(card.label)}</span></label>` +
      `${best}<div class="plan-meta">${outcomes}</div>${score}${apply}</div>`;
  });
  return `<div class="plan-grid">${blocks.join("")}</div>`;
}

// ---------------------------------------------------------------------------
// Branch dialog

export function branchChoicesHtml(choices: BranchChoice[]): string {
  const blocks = choices.map((choice) => {
    const gained = choice.gained.map((a) => `<li class="gained">+ ${escapeHtml(a)}</li>`);
    const lost = choice.lost.map((a) => `<li class="lost">- ${escapeHtml(a)}</li>`);
    const body = gained.length + lost.length > 0
      ? `<ul class="state-diff">${gained.join("")}${lost.join("")}</ul>`
      : '<p class="empty">identical to the current state</p>';
    return `<div class="branch-choice">` +
      `<button class="branch-btn" data-branch="${choice.index}">take branch ${choice.index}</button>` +
      `${body}</div>`;
  });
  return blocks.join("");
}

// ---------------------------------------------------------------------------
// Trust and degree tables

export function trustTableHtml(rows: TrustRow[]): string {
  const body = rows.map((row) => {
    const marks = [
      row.most ? '<span class="badge badge-ok">most</span>' : "",
      row.least ? '<span class="badge badge-bad">least</span>' : "",
    ].join("");
    return `<tr><td>${row.rank}</td><td>${escapeHtml(row.component)}${marks}</td>` +
      `<td>${row.posPairs}</td><td>${row.nposPairs}</td>` +
      `<td>${ratHtml(row.tw)}</td><td>${row.impact}</td></tr>`;
  });
  return `<table class="data-table"><thead><tr>` +
    `<th>rank</th><th>component</th><th>addressed</th><th>compromised</th>` +
    `<th>trust weight</th><th>impact</th></tr></thead><tbody>${body.join("")}</tbody></table>`;
}

export function degreeTableHtml(rows: DegreeRow[], weighted: RatDisplay, lex: LexEntry[] | null): string {
  const body = rows.map((row) =>
    `<tr><td>${escapeHtml(row.concern)}</td>` +
    `<td>${ratHtml(row.degPos)}</td><td>${ratHtml(row.los)}</td>` +
    `<td>${row.weight !== null ? ratHtml(row.weight) : ""}</td></tr>`);
  const lexBlock = lex !== null
    ? `<p>priority vector: ${lex.map((e) =>
        `${escapeHtml(e.concern)} ${ratHtml(e.value)}`).join('<span class="sep"> | </span>')}</p>`
    : "";
  return `<table class="data-table"><thead><tr>` +
    `<th>concern</th><th>direct degree</th><th>level</th><th>weight</th></tr></thead>` +
    `<tbody>${body.join("")}</tbody></table>` +
    `<p>weighted aggregate: ${ratHtml(weighted)}</p>${lexBlock}`;
}

// ---------------------------------------------------------------------------
// History and errors

export function historyHtml(lines: string[]): string {
  if (lines.length === 0) {
    return '<p class="empty">No plan has been applied yet.</p>';
  }
  return `<ol class="history">${lines.map((l) => `<li>${escapeHtml(l)}</li>`).join("")}</ol>`;
}

export function errorHtml(code: string, message: string): string {
  return `<div class="error-box"><strong>${escapeHtml(code)}</strong> ${escapeHtml(message)}</div>`;
}
