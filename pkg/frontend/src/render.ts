import type {
  CorpusSummary,
  EnabledResponse,
  EventModel,
  ProjectView,
  QueryResponse,
  ReachableResponse,
} from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function atomsOf(pred: string, atoms: string[]): string[] {
  return atoms.filter((a) => a === pred || a.startsWith(`${pred}(`));
}

// ── project picker ───────────────────────────────────────────────────

export function renderPicker(corpus: CorpusSummary[]): string {
  const options = corpus
    .map(
      (e) =>
        `<option value="${escapeHtml(e.id)}">${escapeHtml(e.title)} (${escapeHtml(e.id)})</option>`,
    )
    .join('');
  return `
  <section class="panel picker">
    <h2>Open a project</h2>
    <form id="create-corpus">
      <label>Built-in model <select name="corpus">${options}</select></label>
      <label>Scope <input name="scope" value="car" placeholder="car, truck"></label>
      <button type="submit">Create</button>
    </form>
    <details>
      <summary>…or upload rules</summary>
      <form id="create-upload">
        <textarea name="program" rows="8" spellcheck="false"
          placeholder="task2(C) :- artifact1(C) * +artifact3(C)."></textarea>
        <label>Scope <input name="scope" value="car"></label>
        <button type="submit">Create from rules</button>
      </form>
    </details>
    <div id="project-list"></div>
  </section>`;
}

export function renderProjectList(
  projects: { id: string; source: string; events: number }[],
): string {
  if (projects.length === 0) return '<p class="dim">No projects yet.</p>';
  const rows = projects
    .map(
      (p) =>
        `<li><a href="#${escapeHtml(p.id)}">${escapeHtml(p.id)}</a>` +
        ` <span class="dim">${escapeHtml(p.source)}, ${p.events} events</span></li>`,
    )
    .join('');
  return `<h3>Existing projects</h3><ul class="projects">${rows}</ul>`;
}

// ── artifact board ───────────────────────────────────────────────────

export type ArtifactStatus = 'produced' | 'derivable' | 'blocked';

export interface BoardRow {
  artifact: string;
  status: ArtifactStatus;
  produced: string[];
  derivable: string[];
}

/** Fold facts and reachability into one row per artifact predicate. */
export function boardRows(
  artifacts: string[],
  facts: string[],
  reachable: ReachableResponse,
): BoardRow[] {
  return artifacts.map((pred) => {
    const produced = atomsOf(pred, facts);
    const derivable = reachable.supported
      ? atomsOf(pred, reachable.reachable).filter((a) => !produced.includes(a))
      : [];
    const status: ArtifactStatus = produced.length
      ? 'produced'
      : derivable.length
        ? 'derivable'
        : 'blocked';
    return { artifact: pred, status, produced, derivable };
  });
}

export function renderBoard(rows: BoardRow[], reachableSupported: boolean): string {
  const body = rows
    .map((row) => {
      const badges = [
        ...row.produced.map((a) => `<span class="badge ok">${escapeHtml(a)}</span>`),
        ...row.derivable.map(
          (a) => `<span class="badge maybe">${escapeHtml(a)}?</span>`,
        ),
      ].join(' ');
      return `<tr class="${row.status}">
        <td>${escapeHtml(row.artifact)}</td>
        <td class="status">${row.status}</td>
        <td>${badges || '<span class="dim">—</span>'}</td>
      </tr>`;
    })
    .join('');
  const note = reachableSupported
    ? ''
    : '<p class="dim">Reachability is unavailable: the model deletes artifacts.</p>';
  return `
  <section class="panel board">
    <h2>Artifacts</h2>
    <table>
      <thead><tr><th>artifact</th><th>status</th><th>facts</th></tr></thead>
      <tbody>${body}</tbody>
    </table>
    ${note}
    <form id="assert-form">
      <input name="atom" placeholder="artifact1(car)" spellcheck="false">
      <button type="submit" data-kind="assert">assert</button>
      <button type="submit" data-kind="retract">retract</button>
    </form>
  </section>`;
}

// ── task panel ───────────────────────────────────────────────────────

export function renderTasks(enabled: EnabledResponse): string {
  const ready = enabled.enabled
    .map((t) => {
      const critical = t.critical.length
        ? ` <span class="badge critical" title="needed on every path">critical: ${escapeHtml(
            t.critical.join(', '),
          )}</span>`
        : '';
      return `<li>
        <button class="execute" data-task="${escapeHtml(t.task)}">run</button>
        <code>${escapeHtml(t.task)}</code>
        <span class="dim">via disjunct ${t.disjunct}</span>${critical}
      </li>`;
    })
    .join('');
  const blocked = enabled.disabled
    .map((t) => {
      const gaps = t.missing
        .map((m, i) => `<span class="dim">option ${i}: needs ${escapeHtml(m.join(' & ') || '?')}</span>`)
        .join('<br>');
      return `<li class="blocked"><code>${escapeHtml(t.task)}</code><br>${gaps}</li>`;
    })
    .join('');
  return `
  <section class="panel tasks">
    <h2>Tasks</h2>
    <h3>Executable now (${enabled.enabled.length})</h3>
    <ul>${ready || '<li class="dim">none</li>'}</ul>
    <h3>Blocked (${enabled.disabled.length})</h3>
    <ul>${blocked || '<li class="dim">none</li>'}</ul>
  </section>`;
}

// ── query console ────────────────────────────────────────────────────

export interface ConsoleEntry {
  goal: string;
  response?: QueryResponse;
  error?: string;
}

export function formatQueryResult(response: QueryResponse): string {
  if (response.possible === 'unknown') return 'unknown (bounds exhausted)';
  if (!response.possible) return 'false';
  const witness = response.witness?.length
    ? ` — witness: ${response.witness.join(', ')}`
    : '';
  return `true${witness}`;
}

export function renderConsole(entries: ConsoleEntry[]): string {
  const log = entries
    .map((entry) => {
      const result = entry.error
        ? `<span class="err">${escapeHtml(entry.error)}</span>`
        : `<span class="${entry.response && entry.response.possible === true ? 'ok' : ''}">${escapeHtml(
            entry.response ? formatQueryResult(entry.response) : '',
          )}</span>`;
      return `<div class="entry"><code>${escapeHtml(entry.goal)}</code><br>→ ${result}</div>`;
    })
    .join('');
  return `
  <section class="panel console">
    <h2>What-if console</h2>
    <form id="query-form">
      <input name="goal" placeholder="?- possible task4(car)." spellcheck="false">
      <button type="submit">ask</button>
    </form>
    <div class="log">${log || '<p class="dim">Possibility checks never change the project state.</p>'}</div>
  </section>`;
}

// ── timeline ─────────────────────────────────────────────────────────

export function describeEvent(event: EventModel): string {
  const payload = event.payload as Record<string, unknown>;
  switch (event.kind) {
    case 'load':
      return `project loaded (${String(payload.source ?? '')})`;
    case 'execute':
      return `executed ${String(payload.task ?? '')} [${(payload.trace as string[] | undefined)?.join(', ') ?? ''}]`;
    case 'assert':
      return `asserted ${String(payload.atom ?? '')}`;
    case 'retract':
      return `retracted ${String(payload.atom ?? '')}`;
    case 'undo':
      return `undid event ${String(payload.undone_seq ?? '')} (${String(payload.undone_kind ?? '')})`;
    default:
      return event.kind;
  }
}

/** How many changes are currently undoable, replaying the log's cursor. */
export function undoDepth(events: EventModel[]): number {
  let depth = 0;
  for (const event of events) {
    if (['execute', 'assert', 'retract'].includes(event.kind)) depth += 1;
    else if (event.kind === 'undo') depth -= 1;
  }
  return depth;
}

export function renderTimeline(events: EventModel[], undoable: boolean): string {
  const rows = [...events]
    .reverse()
    .map(
      (e) =>
        `<li><span class="seq">#${e.seq}</span> ${escapeHtml(describeEvent(e))}</li>`,
    )
    .join('');
  return `
  <section class="panel timeline">
    <h2>Timeline</h2>
    <button id="undo" ${undoable ? '' : 'disabled'}>undo latest change</button>
    <ol reversed>${rows}</ol>
  </section>`;
}

// ── whole page ───────────────────────────────────────────────────────

export function renderProject(view: ProjectView, consoleEntries: ConsoleEntry[]): string {
  const rows = boardRows(view.graph.artifacts, view.state.facts, view.reachable);
  const undoable = undoDepth(view.history.events) > 0;
  return `
  <div class="columns">
    <div class="col">
      ${renderBoard(rows, view.reachable.supported)}
      ${renderTasks(view.enabled)}
    </div>
    <div class="col">
      ${renderConsole(consoleEntries)}
      ${renderTimeline(view.history.events, undoable)}
      <section class="panel graph"><h2>Dependency graph</h2><div id="graph-host"></div></section>
    </div>
  </div>`;
}
