import { describe, expect, it } from 'vitest';

import {
  boardRows,
  describeEvent,
  formatQueryResult,
  renderBoard,
  renderConsole,
  renderProject,
  renderTasks,
  renderTimeline,
  undoDepth,
} from '../src/render.js';
import type { EnabledResponse, EventModel, ProjectView } from '../src/types.js';

const reachableAll = {
  supported: true,
  reachable: ['artifact1(car)', 'artifact2(car)'],
};

describe('boardRows', () => {
  it('marks produced, derivable and blocked artifacts', () => {
    const rows = boardRows(
      ['artifact1', 'artifact2', 'artifact9'],
      ['artifact1(car)', 'start'],
      reachableAll,
    );
    expect(rows[0]).toMatchObject({ artifact: 'artifact1', status: 'produced' });
    expect(rows[1]).toMatchObject({
      artifact: 'artifact2',
      status: 'derivable',
      derivable: ['artifact2(car)'],
    });
    expect(rows[2]).toMatchObject({ artifact: 'artifact9', status: 'blocked' });
  });

  it('does not confuse predicates sharing a prefix', () => {
    const rows = boardRows(
      ['art', 'artifact1'],
      ['artifact1(car)'],
      { supported: true, reachable: [] },
    );
    expect(rows[0].status).toBe('blocked');
    expect(rows[1].status).toBe('produced');
  });
});

describe('renderBoard', () => {
  it('shows five absent artifacts for a fresh project', () => {
    const artifacts = ['artifact1', 'artifact2', 'artifact3', 'artifact4', 'artifact5'];
    const html = renderBoard(
      boardRows(artifacts, ['start'], { supported: true, reachable: [] }),
      true,
    );
    expect(html.match(/class="blocked"/g)).toHaveLength(5);
    expect(html).not.toContain('class="produced"');
  });
});

describe('renderTasks', () => {
  const enabled: EnabledResponse = {
    enabled: [
      { task: 'task2(car)', disjunct: 0, critical: ['artifact1'] },
      { task: 'task4(car)', disjunct: 0, critical: [] },
    ],
    disabled: [
      { task: 'task1(car)', missing: [['artifact3(car)']], critical: ['artifact1', 'artifact3'] },
    ],
  };

  it('renders an execute button per enabled task', () => {
    const html = renderTasks(enabled);
    expect(html).toContain('data-task="task2(car)"');
    expect(html).toContain('data-task="task4(car)"');
    expect(html).toContain('critical: artifact1');
  });

  it('renders missing-requirement diffs for blocked tasks', () => {
    const html = renderTasks(enabled);
    expect(html).toContain('task1(car)');
    expect(html).toContain('needs artifact3(car)');
  });
});

describe('query console', () => {
  it('formats the three outcomes', () => {
    expect(formatQueryResult({ possible: false, witness: null })).toBe('false');
    expect(
      formatQueryResult({ possible: true, witness: ['+artifact5(car)'] }),
    ).toBe('true — witness: +artifact5(car)');
    expect(formatQueryResult({ possible: 'unknown', witness: null })).toContain(
      'unknown',
    );
  });

  it('renders newest entries first and escapes markup', () => {
    const html = renderConsole([
      { goal: '?- possible task4(car).', response: { possible: true, witness: [] } },
      { goal: '<script>', error: '422: nope' },
    ]);
    expect(html.indexOf('task4(car)')).toBeLessThan(html.indexOf('&lt;script&gt;'));
    expect(html).not.toContain('<script>');
  });
});

describe('timeline', () => {
  const events: EventModel[] = [
    { seq: 1, timestamp: 0, kind: 'load', payload: { source: 'corpus' }, digest: 'a' },
    { seq: 2, timestamp: 1, kind: 'assert', payload: { atom: 'artifact1(car)' }, digest: 'b' },
    {
      seq: 3,
      timestamp: 2,
      kind: 'execute',
      payload: { task: 'task4(car)', trace: ['+artifact5(car)'] },
      digest: 'c',
    },
    { seq: 4, timestamp: 3, kind: 'undo', payload: { undone_seq: 3, undone_kind: 'execute' }, digest: 'b' },
  ];

  it('describes events for humans', () => {
    expect(describeEvent(events[1])).toBe('asserted artifact1(car)');
    expect(describeEvent(events[2])).toBe('executed task4(car) [+artifact5(car)]');
    expect(describeEvent(events[3])).toBe('undid event 3 (execute)');
  });

  it('tracks how many changes remain undoable', () => {
    expect(undoDepth(events)).toBe(1);
    expect(undoDepth(events.slice(0, 1))).toBe(0);
    expect(undoDepth(events.slice(0, 3))).toBe(2);
  });

  it('renders newest first with undo button state', () => {
    const html = renderTimeline(events, true);
    expect(html.indexOf('#4')).toBeLessThan(html.indexOf('#1'));
    expect(html).not.toContain('disabled');
    expect(renderTimeline(events.slice(0, 1), false)).toContain('disabled');
  });
});

describe('renderProject', () => {
  it('assembles every panel from verbatim service responses', () => {
    const view: ProjectView = {
      id: 'abc',
      state: { facts: ['start'], digest: 'd0' },
      enabled: { enabled: [], disabled: [] },
      history: {
        events: [
          { seq: 1, timestamp: 0, kind: 'load', payload: { source: 'corpus' }, digest: 'd0' },
        ],
      },
      reachable: { supported: true, reachable: [] },
      graph: { tasks: ['task1'], artifacts: ['artifact1'], requires: [], produces: [] },
    };
    const html = renderProject(view, []);
    expect(html).toContain('Artifacts');
    expect(html).toContain('Tasks');
    expect(html).toContain('What-if console');
    expect(html).toContain('Timeline');
    expect(html).toContain('id="undo" disabled');
  });
});
