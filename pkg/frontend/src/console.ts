/** Trial console view-model: a state machine around one trial record.
 *
 * The console never computes a dose recommendation itself — every
 * displayed dose, percentage, and stop reason is lifted verbatim from
 * the service payloads; the only client-side arithmetic is display
 * derivation (posterior mean and spread of the service-reported Beta
 * hyperparameters).
 */

import { ApiClient, ApiRequestError, TrialCreateBody } from './api.js';
import type { CohortResponse, TrialEvent, TrialRecord } from './types.js';

export interface DosePanelRow {
  dose: string; // "3" or "2+1"
  mean: number;
  spread: number; // posterior standard deviation
  ess: number;
  patients: number;
  dlts: number;
  isNext: boolean;
  isMtd: boolean;
}

export interface Banner {
  tone: 'info' | 'warning' | 'danger' | 'success';
  text: string;
}

export interface TrialView {
  trialId: string;
  revision: number;
  nTotal: number;
  nextDose: string | null;
  nextCohortSize: number;
  mtd: string | null;
  stopped: boolean;
  stopReason: string | null;
  recommendation: string | null;
  banner: Banner | null;
  doses: DosePanelRow[];
  essBefore: number[] | null; // last cohort's calibration effect
  essAfter: number[] | null;
  timeline: TrialEvent[];
}

function doseLabel(dose: number | number[] | null): string | null {
  if (dose === null) return null;
  return Array.isArray(dose) ? `${dose[0]}+${dose[1]}` : String(dose);
}

function gridPairs(record: TrialRecord): [number, number][] {
  const grid = record.state.grid;
  if (grid.doses) return grid.doses;
  return (grid.rows ?? []).flat();
}

function doseLabels(record: TrialRecord): string[] {
  const grid = record.state.grid;
  if (grid.doses) return grid.doses.map((_, j) => String(j + 1));
  const rows = grid.rows ?? [];
  return rows.flatMap((row, i) => row.map((_, j) => `${i + 1}+${j + 1}`));
}

export type EntryErrors = Partial<Record<'n' | 't', string>>;

export function validateEntry(n: number, t: number, expectedN: number): EntryErrors {
  const errors: EntryErrors = {};
  if (!(Number.isInteger(n) && n === expectedN)) {
    errors.n = `cohort size must be ${expectedN}`;
  }
  if (!(Number.isInteger(t) && t >= 0)) {
    errors.t = 'DLT count must be a nonnegative integer';
  } else if (t > n) {
    errors.t = 'DLT count cannot exceed the cohort size';
  }
  return errors;
}

export class TrialConsole {
  private record: TrialRecord;
  private essBefore: number[] | null = null;
  private essAfter: number[] | null = null;
  private banner: Banner | null = null;
  /** Every dose the engine has assigned or recommended, in order. */
  readonly recommendationSequence: string[] = [];

  private constructor(
    private readonly api: ApiClient,
    record: TrialRecord,
  ) {
    this.record = record;
    this.noteAssignment();
  }

  static async create(api: ApiClient, body: TrialCreateBody): Promise<TrialConsole> {
    return new TrialConsole(api, await api.createTrial(body));
  }

  static async open(api: ApiClient, trialId: string): Promise<TrialConsole> {
    return new TrialConsole(api, await api.getTrial(trialId));
  }

  private noteAssignment(): void {
    const state = this.record.state;
    if (state.stop.stopped) {
      this.recommendationSequence.push(`recommend:${doseLabel(state.recommendation) ?? 'none'}`);
    } else {
      this.recommendationSequence.push(`assign:${doseLabel(state.current_dose)}`);
    }
  }

  get expectedCohortSize(): number {
    const { cohort_size, n_max } = this.record.state.config;
    return Math.min(cohort_size, n_max - this.record.state.n_total);
  }

  /** Submit the current cohort's DLT count; resolves to the new view. */
  async submitCohort(t: number): Promise<TrialView> {
    const n = this.expectedCohortSize;
    const entryErrors = validateEntry(n, t, n);
    if (entryErrors.t) {
      this.banner = { tone: 'warning', text: entryErrors.t };
      return this.view();
    }
    try {
      const resp: CohortResponse = await this.api.postCohort(this.record.trial_id, {
        dose: this.record.state.current_dose,
        n,
        t,
        revision: this.record.revision,
      });
      this.record = resp;
      this.essBefore = resp.calibration.ess_pre;
      this.essAfter = resp.calibration.ess_post;
      this.banner = null;
      this.noteAssignment();
      if (resp.state.stop.stopped) {
        this.banner = this.stopBanner();
      }
    } catch (err) {
      if (err instanceof ApiRequestError && err.status === 409) {
        this.banner = { tone: 'danger', text: 'Trial state changed elsewhere — reload before continuing.' };
      } else if (err instanceof ApiRequestError && err.status === 422) {
        this.banner = { tone: 'info', text: 'Trial already stopped; no further cohorts accepted.' };
      } else if (err instanceof ApiRequestError) {
        this.banner = { tone: 'warning', text: err.message };
      } else {
        throw err;
      }
    }
    return this.view();
  }

  async reload(): Promise<TrialView> {
    this.record = await this.api.getTrial(this.record.trial_id);
    this.banner = null;
    return this.view();
  }

  private stopBanner(): Banner {
    const state = this.record.state;
    switch (state.stop.reason) {
      case 'all_toxic':
        return { tone: 'danger', text: 'Stopped: all doses too toxic — no dose recommended.' };
      case 'mtd_plus_toxic':
        return {
          tone: 'warning',
          text: `Stopped: escalation above the MTD estimate is too toxic — recommending dose ${doseLabel(state.recommendation)}.`,
        };
      default:
        return {
          tone: 'success',
          text:
            state.recommendation === null
              ? 'Stopped at maximum sample size — no dose recommended.'
              : `Stopped at maximum sample size — recommending dose ${doseLabel(state.recommendation)}.`,
        };
    }
  }

  view(): TrialView {
    const state = this.record.state;
    const labels = doseLabels(this.record);
    const pairs = gridPairs(this.record);
    const patients = new Array(labels.length).fill(0);
    const dlts = new Array(labels.length).fill(0);
    for (const cohort of state.cohort_log) {
      const idx = labels.indexOf(doseLabel(cohort.dose as number | number[]) as string);
      patients[idx] += cohort.n;
      dlts[idx] += cohort.t;
    }
    const nextLabel = state.stop.stopped ? null : doseLabel(state.current_dose);
    const mtdLabel = doseLabel(state.mtd);
    const doses: DosePanelRow[] = pairs.map(([a, b], idx) => {
      const mean = a / (a + b);
      return {
        dose: labels[idx],
        mean,
        spread: Math.sqrt((mean * (1 - mean)) / (a + b + 1)),
        ess: a + b,
        patients: patients[idx],
        dlts: dlts[idx],
        isNext: labels[idx] === nextLabel,
        isMtd: labels[idx] === mtdLabel,
      };
    });
    return {
      trialId: this.record.trial_id,
      revision: this.record.revision,
      nTotal: state.n_total,
      nextDose: nextLabel,
      nextCohortSize: state.stop.stopped ? 0 : this.expectedCohortSize,
      mtd: mtdLabel,
      stopped: state.stop.stopped,
      stopReason: state.stop.stopped ? state.stop.reason : null,
      recommendation: doseLabel(state.recommendation),
      banner: this.banner,
      doses,
      essBefore: this.essBefore,
      essAfter: this.essAfter,
      timeline: state.events,
    };
  }
}
