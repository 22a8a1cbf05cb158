import type {
  CorpusEntry,
  CorpusSummary,
  CreateProjectRequest,
  CreateProjectResponse,
  EnabledResponse,
  GraphResponse,
  HistoryResponse,
  MutationResponse,
  ProjectSummary,
  ProjectView,
  QueryResponse,
  ReachableResponse,
  StateResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Typed client for the project service. All rule evaluation happens on
 * the server; this class only moves JSON.
 */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body.detail !== undefined) detail = String(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  corpus(): Promise<CorpusSummary[]> {
    return this.request('/corpus');
  }

  corpusEntry(id: string): Promise<CorpusEntry> {
    return this.request(`/corpus/${id}`);
  }

  projects(): Promise<ProjectSummary[]> {
    return this.request('/projects');
  }

  createProject(req: CreateProjectRequest): Promise<CreateProjectResponse> {
    return this.post('/projects', req);
  }

  state(id: string): Promise<StateResponse> {
    return this.request(`/projects/${id}/state`);
  }

  enabled(id: string): Promise<EnabledResponse> {
    return this.request(`/projects/${id}/enabled`);
  }

  graph(id: string): Promise<GraphResponse> {
    return this.request(`/projects/${id}/graph`);
  }

  history(id: string): Promise<HistoryResponse> {
    return this.request(`/projects/${id}/history`);
  }

  reachable(id: string): Promise<ReachableResponse> {
    return this.request(`/projects/${id}/reachable`);
  }

  query(id: string, goal: string): Promise<QueryResponse> {
    return this.post(`/projects/${id}/query`, { goal });
  }

  execute(id: string, task: string): Promise<MutationResponse> {
    return this.post(`/projects/${id}/execute`, { task });
  }

  assertFact(id: string, atom: string): Promise<MutationResponse> {
    return this.post(`/projects/${id}/assert`, { atom });
  }

  retractFact(id: string, atom: string): Promise<MutationResponse> {
    return this.post(`/projects/${id}/retract`, { atom });
  }

  undo(id: string): Promise<MutationResponse> {
    return this.post(`/projects/${id}/undo`);
  }

  /** One consistent repaint's worth of reads. */
  async projectView(id: string): Promise<ProjectView> {
    const [state, enabled, history, reachable, graph] = await Promise.all([
      this.state(id),
      this.enabled(id),
      this.history(id),
      this.reachable(id),
      this.graph(id),
    ]);
    return { id, state, enabled, history, reachable, graph };
  }
}
