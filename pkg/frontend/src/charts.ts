// Hand-rolled SVG renderers: FPR gauge, FPR-vs-n curve, overlay scatter
// with a density margin. No chart library; everything is a pure string of
// SVG markup sized by viewBox.

import type { CurvePoint } from './core.js';
import type { OverlayData, OverlayPoint } from './types.js';

const SVG = 'http://www.w3.org/2000/svg';

function el(tag: string, attrs: Record<string, string | number>, children = ''): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${String(v)}"`)
    .join(' ');
  return children === '' ? `<${tag} ${parts}/>` : `<${tag} ${parts}>${children}</${tag}>`;
}

function fprColor(fpr: number): string {
  if (fpr < 0.25) return '#2f9e44';
  if (fpr < 0.5) return '#e8a708';
  return '#d6453d';
}

/** Semicircular gauge for the false positive risk in [0, 1]. */
export function renderGauge(fpr: number): string {
  const angle = Math.PI * Math.min(1, Math.max(0, fpr));
  const cx = 100;
  const cy = 95;
  const r = 80;
  const x = cx - r * Math.cos(angle);
  const y = cy - r * Math.sin(angle);
  const large = angle > Math.PI / 2 ? 1 : 0;
  const track = `M ${cx - r} ${cy} A ${r} ${r} 0 0 1 ${cx + r} ${cy}`;
  const arc = `M ${cx - r} ${cy} A ${r} ${r} 0 ${large} 1 ${x.toFixed(2)} ${y.toFixed(2)}`;
  return `<svg xmlns="${SVG}" viewBox="0 0 200 110" role="img" aria-label="FPR gauge">` +
    el('path', { d: track, fill: 'none', stroke: '#e9ecef', 'stroke-width': 14 }) +
    el('path', { d: arc, fill: 'none', stroke: fprColor(fpr), 'stroke-width': 14,
                 'stroke-linecap': 'round' }) +
    el('text', { x: cx, y: 80, 'text-anchor': 'middle', 'font-size': 30,
                 'font-weight': 600, fill: fprColor(fpr) }, fpr.toFixed(3)) +
    el('text', { x: cx, y: 103, 'text-anchor': 'middle', 'font-size': 11,
                 fill: '#868e96' }, 'false positive risk') +
    '</svg>';
}

interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
  nMin: number;
  nMax: number;
}

function xOf(frame: Frame, n: number): number {
  const t = (Math.log(n) - Math.log(frame.nMin)) / (Math.log(frame.nMax) - Math.log(frame.nMin));
  return frame.x0 + t * frame.w;
}

function yOf(frame: Frame, fpr: number): number {
  return frame.y0 + (1 - fpr) * frame.h;
}

function axes(frame: Frame): string {
  let out = '';
  for (const fpr of [0, 0.25, 0.5, 0.75, 1]) {
    const y = yOf(frame, fpr);
    out += el('line', { x1: frame.x0, y1: y, x2: frame.x0 + frame.w, y2: y,
                        stroke: fpr === 0.5 ? '#ced4da' : '#f1f3f5', 'stroke-width': 1 });
    out += el('text', { x: frame.x0 - 6, y: y + 3, 'text-anchor': 'end',
                        'font-size': 9, fill: '#868e96' }, fpr.toFixed(2));
  }
  for (const n of [10, 100, 1000]) {
    if (n < frame.nMin || n > frame.nMax) continue;
    const x = xOf(frame, n);
    out += el('text', { x, y: frame.y0 + frame.h + 12, 'text-anchor': 'middle',
                        'font-size': 9, fill: '#868e96' }, String(n));
  }
  out += el('text', { x: frame.x0 + frame.w / 2, y: frame.y0 + frame.h + 24,
                      'text-anchor': 'middle', 'font-size': 10, fill: '#495057' },
            'sample size (log scale)');
  return out;
}

/** Line chart of the service-computed FPR across the sample-size grid. */
export function renderCurve(curve: CurvePoint[]): string {
  if (curve.length === 0) return '';
  const frame: Frame = {
    x0: 38, y0: 8, w: 300, h: 150,
    nMin: curve[0]!.n, nMax: curve[curve.length - 1]!.n,
  };
  const path = curve
    .map((p, i) => `${i === 0 ? 'M' : 'L'} ${xOf(frame, p.n).toFixed(1)} ${yOf(frame, p.fpr).toFixed(1)}`)
    .join(' ');
  const dots = curve
    .map((p) => el('circle', { cx: xOf(frame, p.n).toFixed(1), cy: yOf(frame, p.fpr).toFixed(1),
                               r: 2.5, fill: '#4263eb' }))
    .join('');
  return `<svg xmlns="${SVG}" viewBox="0 0 350 185" role="img" aria-label="FPR by sample size">` +
    axes(frame) +
    el('path', { d: path, fill: 'none', stroke: '#4263eb', 'stroke-width': 2 }) +
    dots +
    '</svg>';
}

const PALETTE = [
  '#4263eb', '#f76707', '#2f9e44', '#d6336c', '#7048e8', '#1098ad',
  '#e8590c', '#5c940d', '#c2255c', '#6741d9', '#0c8599', '#a61e4d',
];

export function studyColor(studyIds: string[], studyId: string): string {
  const idx = Math.max(0, studyIds.indexOf(studyId));
  return PALETTE[idx % PALETTE.length]!;
}

/** Scatter of per-test FPR vs n with a binned density margin on the right. */
export function renderOverlay(data: OverlayData, highlighted: OverlayPoint[]): string {
  if (data.points.length === 0) {
    return `<svg xmlns="${SVG}" viewBox="0 0 430 210">` +
      el('text', { x: 215, y: 105, 'text-anchor': 'middle', 'font-size': 12,
                   fill: '#868e96' }, 'no tests in this scenario') +
      '</svg>';
  }
  const ns = data.points.map((p) => p.n);
  const frame: Frame = {
    x0: 38, y0: 8, w: 300, h: 170,
    nMin: Math.min(...ns), nMax: Math.max(...ns),
  };
  if (frame.nMin === frame.nMax) {
    frame.nMin = Math.max(1, frame.nMin / 2);
    frame.nMax = frame.nMax * 2;
  }
  const studyIds = [...new Set(data.points.map((p) => p.studyId))].sort();
  const highlightedKeys = new Set(highlighted.map((p) => `${p.studyId}/${p.testId}`));
  const dots = data.points
    .map((p) => {
      const key = `${p.studyId}/${p.testId}`;
      const active = highlightedKeys.size === 0 || highlightedKeys.has(key);
      return el('circle', {
        cx: xOf(frame, p.n).toFixed(1),
        cy: yOf(frame, p.fpr).toFixed(1),
        r: highlightedKeys.has(key) ? 4 : 2.5,
        fill: studyColor(studyIds, p.studyId),
        'fill-opacity': active ? 0.85 : 0.15,
      });
    })
    .join('');
  const maxBin = Math.max(...data.densityBins, 1);
  const binH = frame.h / data.densityBins.length;
  const margin = data.densityBins
    .map((count, i) => {
      const width = (count / maxBin) * 70;
      const y = yOf(frame, (i + 1) / data.densityBins.length);
      return el('rect', { x: frame.x0 + frame.w + 8, y: y.toFixed(1),
                          width: width.toFixed(1), height: (binH - 1).toFixed(1),
                          fill: '#adb5bd' });
    })
    .join('');
  return `<svg xmlns="${SVG}" viewBox="0 0 430 210" role="img" aria-label="FPR scatter">` +
    axes(frame) + dots + margin +
    '</svg>';
}
