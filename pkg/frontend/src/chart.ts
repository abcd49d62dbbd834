/** Chart data for the simulation panel.
 *
 * All values are taken from the service's operating-characteristics
 * payload (already rounded to one decimal) and formatted with the
 * same precision, so the rendered numbers match the service CSV
 * exactly.  Band colors are fixed per band for cross-scenario
 * comparability.
 */

import type { SimulationResult } from './types.js';

export const BAND_ORDER = ['1-2 pts', '3-5 pts', '6-10 pts', '>10 pts'] as const;

export const BAND_COLORS: Record<string, string> = {
  '1-2 pts': '#1b7837',
  '3-5 pts': '#7fbf7b',
  '6-10 pts': '#fdae61',
  '>10 pts': '#d73027',
  none: '#888888',
};

export interface BarSegment {
  key: string; // dose index, band label, or "none"
  value: number;
  label: string; // value at printed precision, e.g. "45.5"
  color: string;
}

export interface StackedBar {
  title: string; // design name
  segments: BarSegment[];
  eN: number;
  eNLabel: string;
}

export function formatPct(x: number): string {
  return x.toFixed(1);
}

const DOSE_PALETTE = ['#4575b4', '#74add1', '#abd9e9', '#e0f3f8', '#fee090', '#fdae61', '#f46d43', '#d73027'];

/** One-agent chart: one stacked recommendation bar per design, one
 * segment per dose plus the none segment. */
export function doseRecommendationBar(result: SimulationResult): StackedBar {
  const segments: BarSegment[] = result.recommendation_pct.map((value, j) => ({
    key: String(j + 1),
    value,
    label: formatPct(value),
    color: DOSE_PALETTE[j % DOSE_PALETTE.length],
  }));
  segments.push({
    key: 'none',
    value: result.none_recommended_pct,
    label: formatPct(result.none_recommended_pct),
    color: BAND_COLORS.none,
  });
  return { title: result.design, segments, eN: result.e_n, eNLabel: result.e_n.toFixed(1) };
}

/** Two-agent chart: one stacked bar per design, one segment per
 * distance band plus the none segment. */
export function bandRecommendationBar(result: SimulationResult): StackedBar {
  if (!result.bands) {
    throw new Error('band chart requires a two-agent result with band grouping');
  }
  const segments: BarSegment[] = BAND_ORDER.map((band) => ({
    key: band,
    value: result.bands!.recommendation[band],
    label: formatPct(result.bands!.recommendation[band]),
    color: BAND_COLORS[band],
  }));
  segments.push({
    key: 'none',
    value: result.bands.none_recommended,
    label: formatPct(result.bands.none_recommended),
    color: BAND_COLORS.none,
  });
  return { title: result.design, segments, eN: result.e_n, eNLabel: result.e_n.toFixed(1) };
}

/** Side-by-side overlay of several designs on the same scenario. */
export function overlayBars(results: SimulationResult[]): StackedBar[] {
  const scenarios = new Set(results.map((r) => r.scenario));
  if (scenarios.size > 1) {
    throw new Error('overlay requires results from a single scenario');
  }
  return results.map((r) => (r.agents === 2 ? bandRecommendationBar(r) : doseRecommendationBar(r)));
}
