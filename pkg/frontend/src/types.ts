// Payload shapes of the project service; atoms travel as strings in rule
// syntax, e.g. "artifact1(car)" or "+artifact5(car)".

export interface CorpusSummary {
  id: string;
  title: string;
  description: string;
}

export interface CorpusEntry extends CorpusSummary {
  program: string;
}

export interface TaskSpec {
  name: string;
  arity: number;
  requires: string[][];
  produces: string[];
}

export interface CreateProjectRequest {
  corpus?: string;
  program?: string;
  tasks?: TaskSpec[];
  scope: string[];
}

export interface StateResponse {
  facts: string[];
  digest: string;
}

export interface CreateProjectResponse {
  id: string;
  scope: string[];
  state: StateResponse;
  tasks: string[];
  artifacts: string[];
}

export interface ProjectSummary {
  id: string;
  source: string;
  scope: string[];
  created_at: number;
  events: number;
  digest: string;
}

export interface EnabledTask {
  task: string;
  disjunct: number;
  critical: string[];
}

export interface DisabledTask {
  task: string;
  missing: string[][];
  critical: string[];
}

export interface EnabledResponse {
  enabled: EnabledTask[];
  disabled: DisabledTask[];
}

export interface QueryResponse {
  possible: boolean | 'unknown';
  witness: string[] | null;
}

export interface EventModel {
  seq: number;
  timestamp: number;
  kind: string;
  payload: Record<string, unknown>;
  digest: string;
}

export interface MutationResponse {
  state: StateResponse;
  event: EventModel;
}

export interface HistoryResponse {
  events: EventModel[];
}

export interface RequireEdge {
  artifact: string;
  task: string;
  disjunct: number;
}

export interface ProduceEdge {
  task: string;
  artifact: string;
  action: string;
}

export interface GraphResponse {
  tasks: string[];
  artifacts: string[];
  requires: RequireEdge[];
  produces: ProduceEdge[];
}

export interface ReachableResponse {
  supported: boolean;
  reachable: string[];
}

/** Everything one repaint needs; every field is a verbatim service response. */
export interface ProjectView {
  id: string;
  state: StateResponse;
  enabled: EnabledResponse;
  history: HistoryResponse;
  reachable: ReachableResponse;
  graph: GraphResponse;
}
