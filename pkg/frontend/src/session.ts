/**
 * Review-session state: the fetched ranked terms plus per-term
 * accept/reject decisions, keyed by term code so they survive slider
 * movement and re-sorting. Pure logic, no DOM.
 */

import type { Decision, QueryResponse, RankedTerm } from './types.js';

export interface ReviewedTerm {
  term: RankedTerm;
  decision: Decision;
  decisionTime: string | null; // ISO timestamp of the last decision
}

export interface ReviewSession {
  phrase: string;
  serverCutoff: number;
  sliderCutoff: number;
  vocabVersion: string;
  terms: ReviewedTerm[]; // server rank order
}

export interface VisibleTerm extends ReviewedTerm {
  /** accepted term sitting below the slider: visible but flagged */
  belowSlider: boolean;
}

export type Clock = () => string;

const isoNow: Clock = () => new Date().toISOString();

export function createSession(
  response: QueryResponse,
  vocabVersion: string,
  sliderCutoff?: number,
): ReviewSession {
  return {
    phrase: response.phrase,
    serverCutoff: response.cutoff,
    sliderCutoff: sliderCutoff ?? response.cutoff,
    vocabVersion,
    terms: response.terms.map((term) => ({
      term,
      decision: 'UNDECIDED',
      decisionTime: null,
    })),
  };
}

export function setDecision(
  session: ReviewSession,
  code: string,
  decision: Decision,
  clock: Clock = isoNow,
): ReviewSession {
  return {
    ...session,
    terms: session.terms.map((t) =>
      t.term.code === code
        ? {
            ...t,
            decision,
            decisionTime: decision === 'UNDECIDED' ? null : clock(),
          }
        : t,
    ),
  };
}

export function setSlider(session: ReviewSession, cutoff: number): ReviewSession {
  return { ...session, sliderCutoff: cutoff };
}

/**
 * Terms shown for the current slider position: everything at or above
 * the cutoff, plus accepted terms below it (flagged, never silently
 * hidden).
 */
export function visibleTerms(session: ReviewSession): VisibleTerm[] {
  const out: VisibleTerm[] = [];
  for (const t of session.terms) {
    const passes = t.term.sim_best >= session.sliderCutoff;
    if (passes) {
      out.push({ ...t, belowSlider: false });
    } else if (t.decision === 'ACCEPTED') {
      out.push({ ...t, belowSlider: true });
    }
  }
  return out;
}

export function visibleCodes(session: ReviewSession): string[] {
  return visibleTerms(session).map((t) => t.term.code);
}

export function acceptedTerms(session: ReviewSession): ReviewedTerm[] {
  return session.terms.filter((t) => t.decision === 'ACCEPTED');
}

export function canExport(session: ReviewSession): boolean {
  return acceptedTerms(session).length > 0;
}

function csvCell(value: string): string {
  return /[",\n]/.test(value) ? `"${value.replace(/"/g, '""')}"` : value;
}

/** CSV of the accepted terms: label, code, sim_best, sim_query, decision_time. */
export function exportCsv(session: ReviewSession): string {
  const lines = ['label,code,sim_best,sim_query,decision_time'];
  for (const t of acceptedTerms(session)) {
    lines.push(
      [
        csvCell(t.term.label),
        csvCell(t.term.code),
        t.term.sim_best.toFixed(4),
        t.term.sim_query.toFixed(4),
        t.decisionTime ?? '',
      ].join(','),
    );
  }
  return lines.join('\n') + '\n';
}

export interface SessionExport {
  phrase: string;
  cutoff: number;
  vocab_version: string;
  exported_at: string;
  accepted: Array<{
    code: string;
    label: string;
    sim_best: number;
    sim_query: number;
    combined: number;
    decision_time: string | null;
  }>;
}

/** JSON of the accepted terms plus the session metadata. */
export function exportJson(session: ReviewSession, clock: Clock = isoNow): string {
  const payload: SessionExport = {
    phrase: session.phrase,
    cutoff: session.sliderCutoff,
    vocab_version: session.vocabVersion,
    exported_at: clock(),
    accepted: acceptedTerms(session).map((t) => ({
      code: t.term.code,
      label: t.term.label,
      sim_best: t.term.sim_best,
      sim_query: t.term.sim_query,
      combined: t.term.combined,
      decision_time: t.decisionTime,
    })),
  };
  return JSON.stringify(payload, null, 2) + '\n';
}

/**
 * Re-apply the decisions of an exported JSON file to a session fetched
 * for the same phrase: every exported code becomes ACCEPTED again with
 * its original decision time.
 */
export function importJson(session: ReviewSession, raw: string): ReviewSession {
  const parsed = JSON.parse(raw) as SessionExport;
  if (parsed.phrase !== session.phrase) {
    throw new Error(
      `export is for phrase ${JSON.stringify(parsed.phrase)}, ` +
        `session is ${JSON.stringify(session.phrase)}`,
    );
  }
  const accepted = new Map(parsed.accepted.map((t) => [t.code, t.decision_time]));
  return {
    ...session,
    sliderCutoff: parsed.cutoff,
    terms: session.terms.map((t) =>
      accepted.has(t.term.code)
        ? {
            ...t,
            decision: 'ACCEPTED' as Decision,
            decisionTime: accepted.get(t.term.code) ?? null,
          }
        : t,
    ),
  };
}
