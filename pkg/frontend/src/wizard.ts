/** New-trial wizard: client-side validation mirroring the service's
 * design-config bounds, so every 400 the server could return is
 * caught before submit. */

import type { TrialCreateBody } from './api.js';

export interface WizardForm {
  agents: 1 | 2;
  theta0: number;
  delta0: number;
  r1: number;
  r2: number;
  alpha0: number;
  eta0: number;
  nMin: number;
  nMax: number;
  cohortSize: number;
  calibrate: boolean;
  nDoses: number; // one agent
  rows: number; // two agents
  cols: number;
}

export type WizardErrors = Partial<Record<keyof WizardForm, string>>;

/** Defaults for the standard one-agent setup. */
export function defaultForm(): WizardForm {
  return {
    agents: 1,
    theta0: 0.3,
    delta0: 0.05,
    r1: 0.95,
    r2: 0.95,
    alpha0: 1.0,
    eta0: 1.0,
    nMin: 10,
    nMax: 24,
    cohortSize: 1,
    calibrate: false,
    nDoses: 6,
    rows: 4,
    cols: 4,
  };
}

export function validateWizard(form: WizardForm): WizardErrors {
  const errors: WizardErrors = {};
  if (!(form.theta0 > 0 && form.theta0 + form.delta0 < 1)) {
    errors.theta0 = 'need 0 < target rate and target + margin < 1';
  }
  if (!(form.delta0 > 0)) {
    errors.delta0 = 'margin must be positive';
  }
  if (!(form.r1 > 0 && form.r1 < 1)) {
    errors.r1 = 'threshold must lie in (0, 1)';
  }
  if (!(form.r2 > 0 && form.r2 < 1)) {
    errors.r2 = 'threshold must lie in (0, 1)';
  }
  if (!(form.alpha0 > 0)) {
    errors.alpha0 = 'underdose weight must be positive';
  }
  if (!(form.eta0 > 0)) {
    errors.eta0 = 'overdose weight must be positive';
  }
  if (!(Number.isInteger(form.nMin) && form.nMin >= 1)) {
    errors.nMin = 'minimum sample size must be a positive integer';
  } else if (!(Number.isInteger(form.nMax) && form.nMax >= form.nMin)) {
    errors.nMax = 'maximum sample size must be an integer >= the minimum';
  }
  if (!(Number.isInteger(form.cohortSize) && form.cohortSize >= 1)) {
    errors.cohortSize = 'cohort size must be a positive integer';
  }
  if (form.agents === 1) {
    if (!(Number.isInteger(form.nDoses) && form.nDoses >= 2)) {
      errors.nDoses = 'need at least two dose levels';
    }
  } else {
    if (!(Number.isInteger(form.rows) && form.rows >= 2)) {
      errors.rows = 'need at least two levels of each agent';
    }
    if (!(Number.isInteger(form.cols) && form.cols >= 2)) {
      errors.cols = 'need at least two levels of each agent';
    }
  }
  return errors;
}

export function isValid(form: WizardForm): boolean {
  return Object.keys(validateWizard(form)).length === 0;
}

/** Translate a validated form into the POST /trials body. */
export function toCreateBody(form: WizardForm): TrialCreateBody {
  const config = {
    theta0: form.theta0,
    delta0: form.delta0,
    r1: form.r1,
    r2: form.r2,
    alpha0: form.alpha0,
    eta0: form.eta0,
    n_min: form.nMin,
    n_max: form.nMax,
    cohort_size: form.cohortSize,
    calibrate: form.calibrate,
  };
  if (form.agents === 2) {
    return { config, agents: 2, shape: [form.rows, form.cols] };
  }
  return { config, agents: 1, n_doses: form.nDoses };
}
