/** Deterministic SVG plotting primitives: byte-identical output for
 * identical inputs (fixed styles, fixed precision, no timestamps). */

export interface Scale {
  (v: number): number;
  ticks(): number[];
  domain: [number, number];
  kind: "linear" | "log";
}

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
}

export function fmtTick(x: number): string {
  if (x === 0) return "0";
  const ax = Math.abs(x);
  if (ax >= 0.01 && ax < 10000) {
    const s = Number(x.toPrecision(4));
    return String(s);
  }
  return x.toExponential(1).replace("e+", "e");
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const f = ((v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  f.domain = [lo, hi];
  f.kind = "linear";
  f.ticks = () => {
    const span = hi - lo;
    const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
    const mult = span / step > 8 ? 2 : 1;
    const s = step * mult;
    const start = Math.ceil(lo / s) * s;
    const out: number[] = [];
    for (let v = start; v <= hi + 1e-12 * span; v += s) out.push(Number(v.toPrecision(12)));
    return out;
  };
  return f;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const safeLo = lo > 0 ? lo : 1e-16;
  const safeHi = hi > safeLo ? hi : safeLo * 10;
  const la = Math.log10(safeLo);
  const lb = Math.log10(safeHi);
  const f = ((v: number) =>
    outLo + ((Math.log10(Math.max(v, 1e-300)) - la) / (lb - la)) * (outHi - outLo)) as Scale;
  f.domain = [safeLo, safeHi];
  f.kind = "log";
  f.ticks = () => {
    const out: number[] = [];
    for (let e = Math.floor(la); e <= Math.ceil(lb); e++) out.push(Math.pow(10, e));
    return out.filter((v) => v >= safeLo / 1.0001 && v <= safeHi * 1.0001);
  };
  return f;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
export const MARKERS = ["circle", "square", "triangle", "diamond"] as const;

export class SvgCanvas {
  readonly width: number;
  readonly height: number;
  private parts: string[] = [];

  constructor(width = 640, height = 480) {
    this.width = width;
    this.height = height;
  }

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#000", widthPx = 1): void {
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${widthPx}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.add(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.5"/>`);
  }

  marker(x: number, y: number, shape: (typeof MARKERS)[number], color: string, size = 4): void {
    if (shape === "circle") {
      this.add(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${size}" fill="${color}"/>`);
    } else if (shape === "square") {
      this.add(
        `<rect x="${fmt(x - size)}" y="${fmt(y - size)}" width="${2 * size}" height="${2 * size}" fill="${color}"/>`,
      );
    } else if (shape === "triangle") {
      const p = `${fmt(x)},${fmt(y - size)} ${fmt(x - size)},${fmt(y + size)} ${fmt(x + size)},${fmt(y + size)}`;
      this.add(`<polygon points="${p}" fill="${color}"/>`);
    } else {
      const p = `${fmt(x)},${fmt(y - size)} ${fmt(x + size)},${fmt(y)} ${fmt(x)},${fmt(y + size)} ${fmt(x - size)},${fmt(y)}`;
      this.add(`<polygon points="${p}" fill="${color}"/>`);
    }
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.add(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, anchor = "middle", size = 12, rotate = 0): void {
    const tr = rotate !== 0 ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
    this.add(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica,sans-serif" font-size="${size}" text-anchor="${anchor}"${tr}>${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="#ffffff"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface Frame {
  canvas: SvgCanvas;
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

/** Axes frame with tick marks and labels; returns the plot region. */
export function drawFrame(
  canvas: SvgCanvas,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  title: string,
  region: { x0: number; x1: number; y0: number; y1: number },
  opts: { xTicks?: boolean } = {},
): void {
  const { x0, x1, y0, y1 } = region;
  const xTicks = opts.xTicks ?? true;
  canvas.line(x0, y1, x1, y1);
  canvas.line(x0, y0, x0, y1);
  for (const t of xTicks ? xScale.ticks() : []) {
    const px = xScale(t);
    canvas.line(px, y1, px, y1 + 5);
    canvas.text(px, y1 + 18, fmtTick(t), "middle", 10);
  }
  for (const t of yScale.ticks()) {
    const py = yScale(t);
    canvas.line(x0 - 5, py, x0, py);
    canvas.text(x0 - 8, py + 3, fmtTick(t), "end", 10);
  }
  canvas.text((x0 + x1) / 2, y1 + 36, xLabel, "middle", 12);
  canvas.text(x0 - 48, (y0 + y1) / 2, yLabel, "middle", 12, -90);
  canvas.text((x0 + x1) / 2, y0 - 10, title, "middle", 14);
}
