/** Parsing for the experiment endpoint's offset-histogram CSV. */

export interface HistogramRow {
  offset: number;
  correct: number;
  hallucinated: number;
  missing: number;
  n: number;
}

const HEADER = "offset,correct,hallucinated,missing,n";

export function parseHistogramCsv(text: string): HistogramRow[] {
  const lines = text.trim().split("\n");
  if (lines[0] !== HEADER) {
    throw new Error(`unexpected histogram header: ${lines[0] ?? "(empty)"}`);
  }
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    if (cells.length !== 5) throw new Error(`malformed histogram row: ${line}`);
    const [offset, correct, hallucinated, missing, n] = cells.map(Number);
    return {
      offset: offset as number,
      correct: correct as number,
      hallucinated: hallucinated as number,
      missing: missing as number,
      n: n as number,
    };
  });
}
