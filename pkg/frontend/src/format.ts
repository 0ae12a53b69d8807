/** Small display formatters and export-summary arithmetic. */

/** Gaps are always shown to three decimals. */
export function formatGap(gap: number): string {
  return gap.toFixed(3);
}

export function formatSim(sim: number): string {
  return sim.toFixed(4);
}

interface ExportedQuestion {
  question_id: string;
  correct_index: number;
}

interface ExportedPair {
  pair_id: string;
  patterns: string[];
  questions: ExportedQuestion[];
}

export interface ExportSummary {
  pairs: number;
  questions: number;
  /** Pattern label occurrences across all exported pairs. */
  histogram: Record<string, number>;
}

/** Count pairs, questions, and pattern labels in an export document. */
export function summarizeExport(doc: unknown): ExportSummary {
  const pairs = (doc as { pairs?: ExportedPair[] })?.pairs;
  if (!Array.isArray(pairs)) {
    throw new Error("export document has no pairs array");
  }
  const histogram: Record<string, number> = {};
  let questions = 0;
  for (const pair of pairs) {
    questions += pair.questions.length;
    for (const pattern of pair.patterns) {
      histogram[pattern] = (histogram[pattern] ?? 0) + 1;
    }
  }
  return { pairs: pairs.length, questions, histogram };
}

export function summaryLine(summary: ExportSummary): string {
  const p = summary.pairs === 1 ? "pair" : "pairs";
  const q = summary.questions === 1 ? "question" : "questions";
  return `${summary.pairs} ${p} / ${summary.questions} ${q}`;
}
