// Canvas drawing of projected billboards. Icons are canvas-drawn glyphs
// keyed by category and images are placeholder thumbnails: the engine only
// transmits references, the viewer owns the pixels. Per-element alphas from
// the snapshot drive every fade; nothing is animated locally.

import type { ElementName, LabelRecord } from "./protocol.js";
import { LOD_ELEMENTS } from "./protocol.js";
import type { ProjectedLabel } from "./projection.js";

export type LodOverride = "auto" | "Lowest" | "Middle" | "Highest";

export interface RenderSettings {
  showInstrumentation: boolean;
  lodOverride: LodOverride;
}

const GLYPHS = ["circle", "triangle", "diamond", "star", "ring"] as const;
type Glyph = (typeof GLYPHS)[number];

/** Stable category -> glyph mapping (hash of the category name). */
export function glyphFor(category: string): Glyph {
  let h = 0;
  for (let i = 0; i < category.length; i++) h = (h * 31 + category.charCodeAt(i)) >>> 0;
  return GLYPHS[h % GLYPHS.length] ?? "circle";
}

/** Axis-aligned box spanned by a projected quad, for laying out contents. */
export function contentBox(p: ProjectedLabel): { x: number; y: number; w: number; h: number } {
  const xs = p.corners.map((c) => c.x);
  const ys = p.corners.map((c) => c.y);
  const x = Math.min(...xs);
  const y = Math.min(...ys);
  return { x, y, w: Math.max(...xs) - x, h: Math.max(...ys) - y };
}

/** Elements the current override allows; "auto" defers to the label's LOD. */
export function allowedElements(label: LabelRecord, override: LodOverride): ReadonlySet<ElementName> {
  const level = override === "auto" ? label.lod : override;
  return new Set(LOD_ELEMENTS[level]);
}

function drawGlyph(ctx: CanvasRenderingContext2D, glyph: Glyph, cx: number, cy: number, r: number): void {
  ctx.beginPath();
  switch (glyph) {
    case "circle":
      ctx.arc(cx, cy, r, 0, Math.PI * 2);
      ctx.fill();
      return;
    case "ring":
      ctx.arc(cx, cy, r, 0, Math.PI * 2);
      ctx.lineWidth = Math.max(1.5, r / 3);
      ctx.stroke();
      return;
    case "triangle":
      ctx.moveTo(cx, cy - r);
      ctx.lineTo(cx + r, cy + r);
      ctx.lineTo(cx - r, cy + r);
      ctx.closePath();
      ctx.fill();
      return;
    case "diamond":
      ctx.moveTo(cx, cy - r);
      ctx.lineTo(cx + r, cy);
      ctx.lineTo(cx, cy + r);
      ctx.lineTo(cx - r, cy);
      ctx.closePath();
      ctx.fill();
      return;
    case "star": {
      for (let i = 0; i < 10; i++) {
        const rad = i % 2 === 0 ? r : r / 2.2;
        const a = (Math.PI / 5) * i - Math.PI / 2;
        const x = cx + rad * Math.cos(a);
        const y = cy + rad * Math.sin(a);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.closePath();
      ctx.fill();
      return;
    }
  }
}

function drawImagePlaceholder(ctx: CanvasRenderingContext2D, x: number, y: number, w: number, h: number): void {
  ctx.strokeRect(x, y, w, h);
  ctx.beginPath();
  ctx.moveTo(x, y);
  ctx.lineTo(x + w, y + h);
  ctx.moveTo(x + w, y);
  ctx.lineTo(x, y + h);
  ctx.stroke();
}

export function drawLabel(ctx: CanvasRenderingContext2D, p: ProjectedLabel, settings: RenderSettings): void {
  const { label } = p;
  const allowed = allowedElements(label, settings.lodOverride);
  const box = contentBox(p);
  if (box.w < 2 || box.h < 2) return;
  const [bl, br, tl, tr] = p.corners;

  if (allowed.has("rectangle") && label.alpha.rectangle > 0) {
    ctx.globalAlpha = label.alpha.rectangle;
    ctx.fillStyle = label.color;
    ctx.beginPath();
    ctx.moveTo(bl.x, bl.y);
    ctx.lineTo(br.x, br.y);
    ctx.lineTo(tr.x, tr.y);
    ctx.lineTo(tl.x, tl.y);
    ctx.closePath();
    ctx.fill();
    ctx.globalAlpha = label.alpha.rectangle * 0.9;
    ctx.strokeStyle = label.kind === "super" ? "#222222" : "#55555588";
    ctx.lineWidth = label.kind === "super" ? 2.5 : 1;
    ctx.stroke();
  }

  const pad = Math.min(box.w, box.h) * 0.08;
  if (allowed.has("icon") && label.alpha.icon > 0) {
    ctx.globalAlpha = label.alpha.icon;
    ctx.fillStyle = "#333333";
    ctx.strokeStyle = "#333333";
    const r = Math.min(box.w, box.h) * 0.1;
    drawGlyph(ctx, glyphFor(label.category), box.x + pad + r, box.y + pad + r, r);
  }

  if (allowed.has("image") && label.alpha.image > 0) {
    ctx.globalAlpha = label.alpha.image;
    ctx.strokeStyle = "#44444488";
    ctx.lineWidth = 1;
    const iw = box.w * 0.4;
    const ih = box.h * 0.35;
    drawImagePlaceholder(ctx, box.x + (box.w - iw) / 2, box.y + box.h * 0.32, iw, ih);
  }

  if (allowed.has("text") && label.alpha.text > 0) {
    ctx.globalAlpha = label.alpha.text;
    ctx.fillStyle = "#111111";
    const size = Math.max(9, Math.min(18, box.h * 0.12));
    ctx.font = `${size}px system-ui, sans-serif`;
    ctx.textBaseline = "top";
    ctx.fillText(label.name, box.x + pad, box.y + box.h * 0.74, box.w - 2 * pad);
    const value = label.kind === "super" ? label.aggregate_value ?? label.scalar_value : label.scalar_value;
    ctx.fillText(`${value.toFixed(0)} ${label.scalar_unit}`, box.x + pad, box.y + box.h * 0.74 + size + 2, box.w - 2 * pad);
  }

  if (label.kind === "super" && label.legend && label.alpha.text > 0) {
    ctx.globalAlpha = label.alpha.text;
    const rows = label.legend;
    const size = Math.max(8, Math.min(13, (box.h * 0.4) / Math.max(rows.length, 1)));
    ctx.font = `${size}px system-ui, sans-serif`;
    ctx.textBaseline = "top";
    rows.forEach((row, i) => {
      const y = box.y + box.h * 0.28 + i * (size + 3);
      if (y + size > box.y + box.h * 0.72) return; // keep rows inside the card
      ctx.fillStyle = row.color;
      ctx.fillRect(box.x + pad, y, size, size);
      ctx.fillStyle = "#111111";
      ctx.fillText(`${row.name} (${row.value.toFixed(0)})`, box.x + pad + size + 4, y, box.w - 2 * pad - size - 4);
    });
  }

  ctx.globalAlpha = 1;
}

export function drawInstrumentation(
  ctx: CanvasRenderingContext2D,
  lines: string[],
): void {
  ctx.globalAlpha = 0.85;
  ctx.fillStyle = "#0b1020";
  const w = 230;
  const h = 14 * lines.length + 12;
  ctx.fillRect(8, 8, w, h);
  ctx.fillStyle = "#9fe8a0";
  ctx.font = "11px ui-monospace, monospace";
  ctx.textBaseline = "top";
  lines.forEach((line, i) => ctx.fillText(line, 14, 14 + i * 14, w - 12));
  ctx.globalAlpha = 1;
}
