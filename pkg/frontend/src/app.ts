import { ApiClient, ApiError } from './api.js';
import { renderGraphSvg } from './graph.js';
import {
  type ConsoleEntry,
  renderPicker,
  renderProject,
  renderProjectList,
} from './render.js';

const POLL_MS = 3000;

/**
 * The dashboard holds no model state of its own: the session id lives in
 * the URL hash, and every paint comes from fresh service reads (skipped
 * when the state digest has not moved).  Mutations run one at a time;
 * extra clicks queue behind the in-flight one.
 */
export class Dashboard {
  private consoleEntries: ConsoleEntry[] = [];
  private lastDigest = '';
  private mutationChain: Promise<void> = Promise.resolve();
  private timer: number | undefined;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly statusBar: HTMLElement,
  ) {}

  start(): void {
    this.root.addEventListener('click', (e) => this.onClick(e));
    this.root.addEventListener('submit', (e) => this.onSubmit(e));
    window.addEventListener('hashchange', () => void this.route());
    this.timer = window.setInterval(() => void this.poll(), POLL_MS);
    void this.route();
  }

  stop(): void {
    if (this.timer !== undefined) window.clearInterval(this.timer);
  }

  private get sessionId(): string {
    return window.location.hash.replace(/^#/, '');
  }

  private fail(error: unknown): void {
    const text =
      error instanceof ApiError
        ? `service error ${error.status}: ${error.detail}`
        : String(error);
    this.statusBar.textContent = text;
    this.statusBar.classList.add('error');
  }

  private clearStatus(): void {
    this.statusBar.textContent = this.sessionId
      ? `project ${this.sessionId}`
      : 'no project open';
    this.statusBar.classList.remove('error');
  }

  async route(): Promise<void> {
    this.consoleEntries = [];
    this.lastDigest = '';
    this.clearStatus();
    if (!this.sessionId) {
      await this.showPicker();
      return;
    }
    await this.refresh();
  }

  private async showPicker(): Promise<void> {
    try {
      const corpus = await this.api.corpus();
      this.root.innerHTML = renderPicker(corpus);
      const projects = await this.api.projects();
      const list = this.root.querySelector('#project-list');
      if (list) list.innerHTML = renderProjectList(projects);
    } catch (error) {
      this.fail(error);
    }
  }

  /** Poll tick: repaint only when the service digest moved. */
  private async poll(): Promise<void> {
    if (!this.sessionId) return;
    try {
      const state = await this.api.state(this.sessionId);
      if (state.digest !== this.lastDigest) await this.refresh();
    } catch (error) {
      this.fail(error);
    }
  }

  async refresh(): Promise<void> {
    if (!this.sessionId) return;
    try {
      const view = await this.api.projectView(this.sessionId);
      this.lastDigest = view.state.digest;
      this.root.innerHTML = renderProject(view, this.consoleEntries);
      const host = this.root.querySelector('#graph-host');
      if (host) host.innerHTML = renderGraphSvg(view.graph);
      this.clearStatus();
    } catch (error) {
      this.fail(error);
    }
  }

  /** Serialize mutations: at most one request in flight. */
  private enqueue(operation: () => Promise<unknown>): void {
    this.mutationChain = this.mutationChain
      .then(async () => {
        await operation();
        await this.refresh();
      })
      .catch((error) => this.fail(error));
  }

  private onClick(event: Event): void {
    const target = event.target as HTMLElement;
    if (target.matches('button.execute')) {
      const task = target.dataset.task;
      if (task) this.enqueue(() => this.api.execute(this.sessionId, task));
    } else if (target.id === 'undo') {
      this.enqueue(() => this.api.undo(this.sessionId));
    }
  }

  private onSubmit(event: Event): void {
    const form = event.target as HTMLFormElement;
    event.preventDefault();
    if (form.id === 'query-form') {
      const goal = (form.elements.namedItem('goal') as HTMLInputElement).value;
      if (goal.trim()) void this.runQuery(goal.trim());
    } else if (form.id === 'assert-form') {
      const atom = (form.elements.namedItem('atom') as HTMLInputElement).value;
      const kind = (event as SubmitEvent).submitter?.dataset.kind ?? 'assert';
      if (!atom.trim()) return;
      this.enqueue(() =>
        kind === 'retract'
          ? this.api.retractFact(this.sessionId, atom.trim())
          : this.api.assertFact(this.sessionId, atom.trim()),
      );
    } else if (form.id === 'create-corpus' || form.id === 'create-upload') {
      void this.createProject(form);
    }
  }

  private async runQuery(goal: string): Promise<void> {
    try {
      const response = await this.api.query(this.sessionId, goal);
      this.consoleEntries.unshift({ goal, response });
    } catch (error) {
      const detail = error instanceof ApiError ? error.message : String(error);
      this.consoleEntries.unshift({ goal, error: detail });
    }
    await this.refresh();
  }

  private async createProject(form: HTMLFormElement): Promise<void> {
    const scopeRaw = (form.elements.namedItem('scope') as HTMLInputElement).value;
    const scope = scopeRaw
      .split(/[,\s]+/)
      .map((s) => s.trim())
      .filter(Boolean);
    try {
      const request =
        form.id === 'create-corpus'
          ? {
              corpus: (form.elements.namedItem('corpus') as HTMLSelectElement).value,
              scope,
            }
          : {
              program: (form.elements.namedItem('program') as HTMLTextAreaElement)
                .value,
              scope,
            };
      const created = await this.api.createProject(request);
      window.location.hash = created.id;
    } catch (error) {
      this.fail(error);
    }
  }
}
