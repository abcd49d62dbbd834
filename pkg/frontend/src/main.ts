/** DOM wiring for the single-page console.  All decision logic lives
 * in the view-model modules; this file only renders their output. */

import { ApiClient } from './api.js';
import { bandRecommendationBar, doseRecommendationBar, StackedBar } from './chart.js';
import { TrialConsole, TrialView } from './console.js';
import { defaultForm, toCreateBody, validateWizard, WizardForm } from './wizard.js';

const api = new ApiClient('', (url, init) => fetch(url, init));

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  node.append(...children);
  return node;
}

function renderView(view: TrialView, onSubmit: (t: number) => void): HTMLElement {
  const root = el('div', { class: 'console' });
  if (view.banner) {
    root.append(el('div', { class: `banner ${view.banner.tone}` }, view.banner.text));
  }
  const table = el('table', { class: 'doses' });
  table.append(
    el('tr', {}, ...['dose', 'posterior mean', 'ESS', 'patients', 'DLTs'].map((h) => el('th', {}, h))),
  );
  for (const row of view.doses) {
    const cls = row.isNext ? 'next' : row.isMtd ? 'mtd' : '';
    table.append(
      el(
        'tr',
        { class: cls },
        el('td', {}, row.dose),
        el('td', {}, `${row.mean.toFixed(3)} ± ${row.spread.toFixed(3)}`),
        el('td', {}, row.ess.toFixed(2)),
        el('td', {}, String(row.patients)),
        el('td', {}, String(row.dlts)),
      ),
    );
  }
  root.append(table);
  if (view.essBefore && view.essAfter) {
    root.append(
      el(
        'div',
        { class: 'calibration' },
        `ESS before calibration: [${view.essBefore.map((x) => x.toFixed(2)).join(', ')}] → after: [${view.essAfter
          .map((x) => x.toFixed(2))
          .join(', ')}]`,
      ),
    );
  }
  if (!view.stopped) {
    const input = el('input', { type: 'number', min: '0', max: String(view.nextCohortSize), value: '0' });
    const button = el('button', {}, `Record cohort at dose ${view.nextDose}`);
    button.addEventListener('click', () => onSubmit(Number(input.value)));
    root.append(el('div', { class: 'entry' }, `Next: dose ${view.nextDose}, ${view.nextCohortSize} patient(s). DLTs: `, input, button));
  } else {
    root.append(el('div', { class: 'final' }, `Final recommendation: ${view.recommendation ?? 'none'}`));
  }
  root.append(
    el('ol', { class: 'timeline' }, ...view.timeline.map((e) => el('li', {}, JSON.stringify(e)))),
  );
  return root;
}

function renderBar(bar: StackedBar): HTMLElement {
  const root = el('div', { class: 'bar' }, el('h3', {}, `${bar.title} — E(n) ${bar.eNLabel}`));
  for (const seg of bar.segments) {
    const block = el('div', { class: 'segment', style: `background:${seg.color};width:${Math.max(seg.value, 1)}%` });
    block.title = `${seg.key}: ${seg.label}%`;
    block.append(`${seg.key} ${seg.label}%`);
    root.append(block);
  }
  return root;
}

async function startTrial(form: WizardForm, mount: HTMLElement): Promise<void> {
  const trial = await TrialConsole.create(api, toCreateBody(form));
  const draw = (view: TrialView) => {
    mount.replaceChildren(renderView(view, async (t) => draw(await trial.submitCohort(t))));
  };
  draw(trial.view());
}

async function runSimulation(scenario: string, reps: number, seed: number, mount: HTMLElement): Promise<void> {
  mount.replaceChildren(el('p', {}, 'running…'));
  const bars: StackedBar[] = [];
  for (const calibrate of [false, true]) {
    const job = await api.startSimulation({ scenario, calibrate, reps, seed });
    const done = await api.waitForSimulation(job.job_id);
    if (done.status === 'failed' || !done.result) {
      mount.replaceChildren(el('p', { class: 'banner danger' }, `simulation failed: ${done.error}`));
      return;
    }
    bars.push(done.result.agents === 2 ? bandRecommendationBar(done.result) : doseRecommendationBar(done.result));
  }
  mount.replaceChildren(...bars.map(renderBar));
}

export function boot(): void {
  const app = document.getElementById('app')!;
  const trialMount = el('div', { id: 'trial' });
  const simMount = el('div', { id: 'sim' });

  const form = defaultForm();
  const errorBox = el('div', { class: 'errors' });
  const startButton = el('button', {}, 'Start trial (defaults)');
  startButton.addEventListener('click', () => {
    const errors = validateWizard(form);
    if (Object.keys(errors).length > 0) {
      errorBox.replaceChildren(...Object.values(errors).map((e) => el('p', {}, e!)));
      return;
    }
    void startTrial(form, trialMount);
  });

  const scenarioInput = el('input', { value: 'two-agent-A' });
  const simButton = el('button', {}, 'Run simulation');
  simButton.addEventListener('click', () => void runSimulation(scenarioInput.value, 1000, 0, simMount));

  app.replaceChildren(
    el('h1', {}, 'Dose-finding console'),
    startButton,
    errorBox,
    trialMount,
    el('h2', {}, 'Simulations'),
    scenarioInput,
    simButton,
    simMount,
  );
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot();
}
