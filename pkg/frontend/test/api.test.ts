import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';

interface Recorded {
  url: string;
  method: string;
  body?: unknown;
}

function stubClient(responses: Record<string, unknown>, log: Recorded[] = []) {
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    log.push({
      url,
      method: init?.method ?? 'GET',
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    const key = `${init?.method ?? 'GET'} ${url}`;
    if (key in responses) {
      return new Response(JSON.stringify(responses[key]), { status: 200 });
    }
    return new Response(JSON.stringify({ detail: 'no such route' }), {
      status: 404,
    });
  };
  return { client: new ApiClient('http://svc', fetchFn), log };
}

describe('ApiClient', () => {
  it('sends queries as JSON goal payloads', async () => {
    const { client, log } = stubClient({
      'POST http://svc/projects/p1/query': { possible: false, witness: null },
    });
    const result = await client.query('p1', '?- possible task4(car).');
    expect(result.possible).toBe(false);
    expect(log[0]).toEqual({
      url: 'http://svc/projects/p1/query',
      method: 'POST',
      body: { goal: '?- possible task4(car).' },
    });
  });

  it('surfaces service errors verbatim with the status code', async () => {
    const fetchFn = async () =>
      new Response(JSON.stringify({ detail: 'task task3(car) is not executable now' }), {
        status: 409,
      });
    const client = new ApiClient('http://svc', fetchFn);
    const error = await client.execute('p1', 'task3(car)').catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(409);
    expect(error.detail).toBe('task task3(car) is not executable now');
  });

  it('aggregates one repaint of reads via projectView', async () => {
    const { client, log } = stubClient({
      'GET http://svc/projects/p1/state': { facts: ['start'], digest: 'd' },
      'GET http://svc/projects/p1/enabled': { enabled: [], disabled: [] },
      'GET http://svc/projects/p1/history': { events: [] },
      'GET http://svc/projects/p1/reachable': { supported: true, reachable: [] },
      'GET http://svc/projects/p1/graph': {
        tasks: [],
        artifacts: [],
        requires: [],
        produces: [],
      },
    });
    const view = await client.projectView('p1');
    expect(view.state.digest).toBe('d');
    expect(log).toHaveLength(5);
    expect(new Set(log.map((r) => r.method))).toEqual(new Set(['GET']));
  });

  it('creates projects from corpus ids with a scope', async () => {
    const { client, log } = stubClient({
      'POST http://svc/projects': {
        id: 'p9',
        scope: ['car'],
        state: { facts: ['start'], digest: 'd' },
        tasks: ['task1'],
        artifacts: ['artifact1'],
      },
    });
    const created = await client.createProject({
      corpus: 'sample_network',
      scope: ['car'],
    });
    expect(created.id).toBe('p9');
    expect(log[0].body).toEqual({ corpus: 'sample_network', scope: ['car'] });
  });
});
