import { ApiError, fetchInfo, fetchQuery } from './api.js';
import {
  canExport,
  createSession,
  exportCsv,
  exportJson,
  importJson,
  setDecision,
  setSlider,
  visibleTerms,
  type ReviewSession,
} from './session.js';
import type { Decision } from './types.js';

const SLIDER_MIN = 0.5;
const SLIDER_MAX = 0.95;
const SLIDER_DEFAULT = 0.6;

const params = new URLSearchParams(window.location.search);
const API_BASE = params.get('api') ?? 'http://127.0.0.1:8765';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const phraseInput = $<HTMLInputElement>('phrase');
const fetchButton = $<HTMLButtonElement>('fetch');
const slider = $<HTMLInputElement>('cutoff');
const sliderValue = $<HTMLSpanElement>('cutoff-value');
const banner = $<HTMLDivElement>('banner');
const statusBar = $<HTMLDivElement>('status');
const tableBody = $<HTMLTableSectionElement>('terms-body');
const summary = $<HTMLDivElement>('summary');
const exportCsvButton = $<HTMLButtonElement>('export-csv');
const exportJsonButton = $<HTMLButtonElement>('export-json');
const importInput = $<HTMLInputElement>('import-json');

slider.min = String(SLIDER_MIN);
slider.max = String(SLIDER_MAX);
slider.step = '0.01';
slider.value = String(SLIDER_DEFAULT);

let session: ReviewSession | null = null;
let vocabVersion = '';
let fetchSeq = 0;

function showError(message: string): void {
  banner.textContent = message;
  banner.classList.remove('hidden');
}

function clearError(): void {
  banner.classList.add('hidden');
}

function download(filename: string, content: string, mime: string): void {
  const blob = new Blob([content], { type: mime });
  const url = URL.createObjectURL(blob);
  const a = document.createElement('a');
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}

function decisionButton(code: string, decision: Decision, current: Decision,
                        text: string): HTMLButtonElement {
  const btn = document.createElement('button');
  btn.textContent = text;
  btn.className = decision.toLowerCase();
  if (decision === current) btn.classList.add('active');
  btn.addEventListener('click', () => {
    if (!session) return;
    const next = current === decision ? 'UNDECIDED' : decision;
    session = setDecision(session, code, next);
    render();
  });
  return btn;
}

function render(): void {
  sliderValue.textContent = Number(slider.value).toFixed(2);
  tableBody.replaceChildren();
  if (!session) {
    summary.textContent = 'no session';
    exportCsvButton.disabled = true;
    exportJsonButton.disabled = true;
    return;
  }
  const visible = visibleTerms(session);
  const accepted = session.terms.filter((t) => t.decision === 'ACCEPTED');
  summary.textContent =
    `${visible.length} visible of ${session.terms.length} fetched, ` +
    `${accepted.length} accepted (cut-off ${session.sliderCutoff.toFixed(2)})`;

  for (const t of visible) {
    const row = document.createElement('tr');
    if (t.belowSlider) row.classList.add('below-slider');
    if (t.decision !== 'UNDECIDED') row.classList.add(t.decision.toLowerCase());
    const cells = [
      String(t.term.rank),
      t.term.code,
      t.term.label + (t.belowSlider ? ' (below cut-off)' : ''),
      t.term.sim_best.toFixed(4),
      t.term.sim_query.toFixed(4),
    ];
    for (const text of cells) {
      const td = document.createElement('td');
      td.textContent = text;
      row.appendChild(td);
    }
    const actions = document.createElement('td');
    actions.appendChild(decisionButton(t.term.code, 'ACCEPTED', t.decision, 'accept'));
    actions.appendChild(decisionButton(t.term.code, 'REJECTED', t.decision, 'reject'));
    row.appendChild(actions);
    tableBody.appendChild(row);
  }
  const exportable = canExport(session);
  exportCsvButton.disabled = !exportable;
  exportJsonButton.disabled = !exportable;
}

async function runFetch(): Promise<void> {
  const phrase = phraseInput.value.trim();
  if (!phrase) {
    showError('enter a concept phrase first');
    return;
  }
  const seq = ++fetchSeq;
  fetchButton.disabled = true;
  try {
    // fetch at the slider minimum so the slider can reveal everything
    const response = await fetchQuery(API_BASE, phrase, SLIDER_MIN);
    if (seq !== fetchSeq) return; // superseded by a newer request
    clearError();
    session = createSession(response, vocabVersion, Number(slider.value));
    render();
  } catch (err) {
    // keep the existing session untouched on failure
    if (seq === fetchSeq) {
      showError(err instanceof ApiError ? err.message : String(err));
    }
  } finally {
    if (seq === fetchSeq) fetchButton.disabled = false;
  }
}

fetchButton.addEventListener('click', () => void runFetch());
phraseInput.addEventListener('keydown', (e) => {
  if (e.key === 'Enter') void runFetch();
});

slider.addEventListener('input', () => {
  if (session) session = setSlider(session, Number(slider.value));
  render();
});

exportCsvButton.addEventListener('click', () => {
  if (session && canExport(session)) {
    download(`${session.phrase}-terms.csv`, exportCsv(session), 'text/csv');
  }
});

exportJsonButton.addEventListener('click', () => {
  if (session && canExport(session)) {
    download(`${session.phrase}-terms.json`, exportJson(session),
             'application/json');
  }
});

importInput.addEventListener('change', async () => {
  const file = importInput.files?.[0];
  if (!file || !session) return;
  try {
    session = importJson(session, await file.text());
    slider.value = String(session.sliderCutoff);
    clearError();
    render();
  } catch (err) {
    showError(`import failed: ${String(err)}`);
  } finally {
    importInput.value = '';
  }
});

async function init(): Promise<void> {
  render();
  try {
    const info = await fetchInfo(API_BASE);
    vocabVersion = info.vocab_version;
    statusBar.textContent =
      `${API_BASE} — vocabulary ${info.vocab_version} ` +
      `(${info.term_count} terms, ${info.provider_id})`;
  } catch (err) {
    statusBar.textContent = API_BASE;
    showError(err instanceof ApiError ? err.message : String(err));
  }
}

void init();
