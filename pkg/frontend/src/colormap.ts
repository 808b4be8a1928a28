/**
 * Color scales: perceptually ordered white-orange-red-blue ramp for the
 * distance heatmaps (embedded as a constant control-point table, interpolated
 * linearly), a symmetric diverging ramp for dilation coloring, and the
 * white-to-black shading used by reduction-group rectangles.
 */

export type RGB = [number, number, number];

// control points for the heatmap ramp: white -> orange -> red -> blue
const WORB_CONTROL: RGB[] = [
  [255, 255, 255],
  [255, 237, 206],
  [255, 208, 134],
  [255, 168, 70],
  [252, 121, 40],
  [235, 74, 36],
  [202, 44, 68],
  [152, 46, 126],
  [95, 55, 170],
  [35, 49, 181],
  [10, 22, 121],
];

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

function sampleRamp(control: RGB[], t: number): RGB {
  const x = Math.min(1, Math.max(0, t)) * (control.length - 1);
  const i = Math.min(control.length - 2, Math.floor(x));
  const f = x - i;
  const [r0, g0, b0] = control[i];
  const [r1, g1, b1] = control[i + 1];
  return [
    Math.round(lerp(r0, r1, f)),
    Math.round(lerp(g0, g1, f)),
    Math.round(lerp(b0, b1, f)),
  ];
}

/** Heatmap color for a normalized distance t in [0, 1]. */
export function heatmapColor(t: number): RGB {
  return sampleRamp(WORB_CONTROL, t);
}

/** Luminance estimate (Rec. 709 weights). Decreasing along the heatmap ramp
 * (strictly at the control points, within channel-rounding jitter between
 * them), so nearby-vs-far cells stay orderable by lightness. */
export function luminance([r, g, b]: RGB): number {
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

const DIVERGING_CONTROL: RGB[] = [
  [33, 102, 172], // contraction end
  [103, 169, 207],
  [209, 229, 240],
  [247, 247, 247], // zero
  [253, 219, 199],
  [239, 138, 98],
  [178, 24, 43], // extension end
];

/** Diverging color for a signed scalar v with symmetric scale vmax. */
export function divergingColor(v: number, vmax: number): RGB {
  const t = vmax > 0 ? 0.5 + 0.5 * Math.min(1, Math.max(-1, v / vmax)) : 0.5;
  return sampleRamp(DIVERGING_CONTROL, t);
}

/** White (0) to black (1) shading for reduction-group rectangles. */
export function grayShade(t: number): RGB {
  const v = Math.round(255 * (1 - Math.min(1, Math.max(0, t))));
  return [v, v, v];
}

export function rgbToHex([r, g, b]: RGB): string {
  const h = (x: number) => x.toString(16).padStart(2, "0");
  return `#${h(r)}${h(g)}${h(b)}`;
}
