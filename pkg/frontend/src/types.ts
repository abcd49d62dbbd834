/** Payload shapes of the trial service JSON API. */

export type Dose = number | [number, number];

export interface DesignConfig {
  theta0: number;
  delta0: number;
  r1: number;
  r2: number;
  alpha0: number;
  eta0: number;
  n_min: number;
  n_max: number;
  cohort_size: number;
  calibrate: boolean;
  escalation_constraint: string;
}

export interface GridDoc {
  doses?: [number, number][];
  rows?: [number, number][][];
}

export interface StopStatus {
  stopped: boolean;
  reason: 'none' | 'max_n' | 'all_toxic' | 'mtd_plus_toxic';
}

export interface TrialEvent {
  kind: 'updated' | 'calibrated' | 'assigned' | 'stopped' | 'recommended';
  [key: string]: unknown;
}

export interface TrialStateDoc {
  version: number;
  agents: 1 | 2;
  config: DesignConfig;
  initial_grid: GridDoc;
  grid: GridDoc;
  cohort_log: { dose: number | number[]; n: number; t: number }[];
  events: TrialEvent[];
  n_total: number;
  current_dose: number | number[];
  mtd: number | number[] | null;
  stop: StopStatus;
  recommendation: number | number[] | null;
}

export interface TrialRecord {
  trial_id: string;
  revision: number;
  created_at: string;
  updated_at: string;
  state: TrialStateDoc;
}

export interface CohortResponse extends TrialRecord {
  calibration: { ess_pre: number[]; ess_post: number[] };
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field?: string;
}

export interface BandTable {
  [band: string]: number;
}

export interface SimulationResult {
  scenario: string;
  design: 'CFBD' | 'c-CFBD';
  agents: 1 | 2;
  reps: number;
  seed: number;
  allocation_pct: number[];
  recommendation_pct: number[];
  none_recommended_pct: number;
  e_n: number;
  bands?: {
    allocation: BandTable;
    recommendation: BandTable;
    cumulative_allocation: BandTable;
    cumulative_recommendation: BandTable;
    none_recommended: number;
    e_n: number;
  };
}

export interface SimulationJob {
  job_id: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  request: Record<string, unknown>;
  result: SimulationResult | null;
  error: string | null;
}
