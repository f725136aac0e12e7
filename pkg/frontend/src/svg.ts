/**
 * Minimal deterministic SVG scene builder.
 *
 * Coordinates are formatted with fixed precision and no run metadata is
 * embedded, so identical inputs produce byte-identical files.
 */

export interface Scale {
  (value: number): number;
  ticks(): number[];
  format(value: number): string;
}

const fmt = (value: number): string => {
  const s = value.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  const scale = ((value: number) => outLo + ((value - lo) / span) * (outHi - outLo)) as Scale;
  scale.ticks = () => {
    const step = niceStep(span / 5);
    const first = Math.ceil(lo / step) * step;
    const out: number[] = [];
    for (let t = first; t <= hi + 1e-12 * Math.abs(span); t += step) out.push(t);
    return out;
  };
  scale.format = (value) => trimNumber(value);
  return scale;
}

export function log10Scale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const a = Math.log10(lo);
  const b = Math.log10(hi);
  const span = b - a || 1;
  const scale = ((value: number) =>
    outLo + ((Math.log10(value) - a) / span) * (outHi - outLo)) as Scale;
  scale.ticks = () => {
    const decades: number[] = [];
    for (let e = Math.ceil(a); e <= Math.floor(b) + 1e-12; e += 1) decades.push(10 ** e);
    if (decades.length >= 2) return decades;
    // narrow range: fall back to the 1-2-5 sequence inside it
    const out: number[] = [];
    for (let e = Math.floor(a) - 1; e <= Math.ceil(b) + 1; e += 1) {
      for (const m of [1, 2, 5]) {
        const t = m * 10 ** e;
        if (t >= lo * (1 - 1e-12) && t <= hi * (1 + 1e-12)) out.push(t);
      }
    }
    return out.length >= 2 ? out : [lo, hi];
  };
  scale.format = (value) => {
    const e = Math.log10(value);
    return Number.isInteger(e) ? `1e${e}` : trimNumber(value);
  };
  return scale;
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(raw));
  const unit = raw / mag;
  if (unit < 1.5) return mag;
  if (unit < 3.5) return 2 * mag;
  if (unit < 7.5) return 5 * mag;
  return 10 * mag;
}

function trimNumber(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 0.01 && abs < 10000) {
    return String(Number(value.toPrecision(6)));
  }
  return value.toExponential(2);
}

export interface Curve {
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
  label?: string;
  markers?: boolean;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  curves: Curve[];
  logX?: boolean;
  logY?: boolean;
  xWindow?: [number, number];
}

export const PALETTE = ["#1f5fa8", "#1fa87c", "#c2701f", "#9c2f9c", "#a81f2f", "#5f5f5f"];

const W = 460;
const H = 360;
const MARGIN = { left: 62, right: 14, top: 30, bottom: 44 };

function panelSvg(panel: Panel, offsetX: number): string {
  const inWindow = (x: number) =>
    !panel.xWindow || (x >= panel.xWindow[0] && x <= panel.xWindow[1]);
  const xs: number[] = [];
  const ys: number[] = [];
  for (const curve of panel.curves) {
    for (let i = 0; i < curve.x.length; i += 1) {
      const x = curve.x[i]!;
      const y = curve.y[i]!;
      if (!inWindow(x) || Number.isNaN(y)) continue;
      xs.push(x);
      ys.push(y);
    }
  }
  if (xs.length === 0) throw new Error(`panel '${panel.title}' has no data in view`);
  const pad = (lo: number, hi: number, log: boolean): [number, number] => {
    if (log) return [lo / 1.5, hi * 1.5];
    const d = (hi - lo || Math.abs(hi) || 1) * 0.06;
    return [lo - d, hi + d];
  };
  const [xLo, xHi] = pad(Math.min(...xs), Math.max(...xs), panel.logX ?? false);
  const [yLo, yHi] = pad(Math.min(...ys), Math.max(...ys), panel.logY ?? false);
  const sx = (panel.logX ? log10Scale : linearScale)(
    xLo, xHi, offsetX + MARGIN.left, offsetX + W - MARGIN.right);
  const sy = (panel.logY ? log10Scale : linearScale)(
    yLo, yHi, H - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  const axisColor = "#333333";
  parts.push(`<rect x="${fmt(offsetX + MARGIN.left)}" y="${fmt(MARGIN.top)}" ` +
    `width="${fmt(W - MARGIN.left - MARGIN.right)}" height="${fmt(H - MARGIN.top - MARGIN.bottom)}" ` +
    `fill="none" stroke="${axisColor}" stroke-width="1"/>`);
  for (const t of sx.ticks()) {
    const px = sx(t);
    parts.push(`<line x1="${fmt(px)}" y1="${fmt(H - MARGIN.bottom)}" x2="${fmt(px)}" ` +
      `y2="${fmt(H - MARGIN.bottom + 4)}" stroke="${axisColor}" stroke-width="1"/>`);
    parts.push(`<text x="${fmt(px)}" y="${fmt(H - MARGIN.bottom + 16)}" ` +
      `text-anchor="middle" font-size="10">${sx.format(t)}</text>`);
  }
  for (const t of sy.ticks()) {
    const py = sy(t);
    parts.push(`<line x1="${fmt(offsetX + MARGIN.left - 4)}" y1="${fmt(py)}" ` +
      `x2="${fmt(offsetX + MARGIN.left)}" y2="${fmt(py)}" stroke="${axisColor}" stroke-width="1"/>`);
    parts.push(`<text x="${fmt(offsetX + MARGIN.left - 6)}" y="${fmt(py + 3)}" ` +
      `text-anchor="end" font-size="10">${sy.format(t)}</text>`);
  }
  parts.push(`<text x="${fmt(offsetX + (MARGIN.left + W - MARGIN.right) / 2)}" ` +
    `y="${fmt(H - 8)}" text-anchor="middle" font-size="11">${panel.xLabel}</text>`);
  parts.push(`<text x="${fmt(offsetX + 14)}" y="${fmt(MARGIN.top - 12)}" ` +
    `font-size="11">${panel.yLabel}</text>`);
  parts.push(`<text x="${fmt(offsetX + (MARGIN.left + W - MARGIN.right) / 2)}" ` +
    `y="${fmt(MARGIN.top - 10)}" text-anchor="middle" font-size="12">${panel.title}</text>`);

  let legendY = MARGIN.top + 10;
  for (const curve of panel.curves) {
    const pts: string[] = [];
    for (let i = 0; i < curve.x.length; i += 1) {
      const x = curve.x[i]!;
      const y = curve.y[i]!;
      if (!inWindow(x) || Number.isNaN(y)) continue;
      pts.push(`${fmt(sx(x))},${fmt(sy(y))}`);
    }
    if (pts.length === 0) continue;
    const dash = curve.dashed ? ' stroke-dasharray="6,4"' : "";
    if (pts.length > 1) {
      parts.push(`<polyline points="${pts.join(" ")}" fill="none" ` +
        `stroke="${curve.color}" stroke-width="1.5"${dash}/>`);
    }
    if (curve.markers || pts.length === 1) {
      for (const p of pts) {
        const [px, py] = p.split(",");
        parts.push(`<circle cx="${px}" cy="${py}" r="2.5" fill="${curve.color}"/>`);
      }
    }
    if (curve.label) {
      const lx = offsetX + W - MARGIN.right - 110;
      parts.push(`<line x1="${fmt(lx)}" y1="${fmt(legendY)}" x2="${fmt(lx + 22)}" ` +
        `y2="${fmt(legendY)}" stroke="${curve.color}" stroke-width="1.5"${dash}/>`);
      parts.push(`<text x="${fmt(lx + 27)}" y="${fmt(legendY + 3)}" ` +
        `font-size="10">${curve.label}</text>`);
      legendY += 13;
    }
  }
  return parts.join("\n");
}

export function renderFigure(panels: Panel[]): string {
  const width = W * panels.length;
  const body = panels.map((panel, i) => panelSvg(panel, i * W)).join("\n");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${H}" ` +
    `viewBox="0 0 ${width} ${H}" font-family="Helvetica,Arial,sans-serif">\n` +
    `<rect width="${width}" height="${H}" fill="#ffffff"/>\n${body}\n</svg>\n`;
}
