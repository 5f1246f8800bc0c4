// Display rounding for readouts. Values pass through unchanged apart from
// fixed-precision formatting; parsing a readout back recovers the service
// value within the displayed granularity.

export function fmtProb(x: number): string {
  return x.toFixed(3);
}

export function fmtPercent(x: number): string {
  return `${(100 * x).toFixed(1)}%`;
}

// Likelihood ratios are unbounded; very large values are capped for
// readability (the raw value stays available on the snapshot).
export function fmtLR(x: number): string {
  if (x >= 1000) return '≥ 1000';
  if (x >= 100) return x.toFixed(0);
  return x.toFixed(2);
}

export function fmtN(x: number): string {
  return String(Math.round(x));
}

export function parseProb(readout: string): number {
  return Number(readout);
}
