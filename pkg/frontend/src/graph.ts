import type { GraphResponse } from './types.js';
import { escapeHtml } from './render.js';

// Client-side layout of the bipartite dependency graph: artifacts on the
// left, tasks on the right, requirement edges pointing right and
// production edges curving back left.

export interface NodePos {
  id: string;
  kind: 'task' | 'artifact';
  x: number;
  y: number;
}

export interface EdgePath {
  from: string;
  to: string;
  label: string;
  kind: 'requires' | 'produces';
  path: string; // SVG path data
}

export interface Layout {
  width: number;
  height: number;
  nodes: NodePos[];
  edges: EdgePath[];
}

const COLUMN_X = { artifact: 130, task: 430 } as const;
const ROW_H = 54;
const TOP = 40;

export function layoutGraph(graph: GraphResponse): Layout {
  const nodes: NodePos[] = [];
  const position = new Map<string, NodePos>();
  graph.artifacts.forEach((id, i) => {
    const node: NodePos = { id, kind: 'artifact', x: COLUMN_X.artifact, y: TOP + i * ROW_H };
    nodes.push(node);
    position.set(`artifact:${id}`, node);
  });
  graph.tasks.forEach((id, i) => {
    const node: NodePos = { id, kind: 'task', x: COLUMN_X.task, y: TOP + i * ROW_H };
    nodes.push(node);
    position.set(`task:${id}`, node);
  });

  const edges: EdgePath[] = [];
  for (const edge of graph.requires) {
    const from = position.get(`artifact:${edge.artifact}`);
    const to = position.get(`task:${edge.task}`);
    if (!from || !to) continue;
    edges.push({
      from: edge.artifact,
      to: edge.task,
      label: String(edge.disjunct),
      kind: 'requires',
      path: `M ${from.x + 60} ${from.y} C ${from.x + 150} ${from.y}, ${to.x - 150} ${to.y}, ${to.x - 55} ${to.y}`,
    });
  }
  for (const edge of graph.produces) {
    const from = position.get(`task:${edge.task}`);
    const to = position.get(`artifact:${edge.artifact}`);
    if (!from || !to) continue;
    edges.push({
      from: edge.task,
      to: edge.artifact,
      label: edge.action,
      kind: 'produces',
      path: `M ${from.x - 55} ${from.y + 8} C ${from.x - 170} ${from.y + 30}, ${to.x + 170} ${to.y + 30}, ${to.x + 60} ${to.y + 8}`,
    });
  }

  const rows = Math.max(graph.artifacts.length, graph.tasks.length, 1);
  return { width: 560, height: TOP + rows * ROW_H + 20, nodes, edges };
}

/** Curve midpoint, used to place edge labels. */
function midOf(path: string): { x: number; y: number } {
  const numbers = path.match(/-?\d+(\.\d+)?/g)?.map(Number) ?? [0, 0];
  const xs = numbers.filter((_, i) => i % 2 === 0);
  const ys = numbers.filter((_, i) => i % 2 === 1);
  return {
    x: (xs[0] + xs[xs.length - 1]) / 2,
    y: (ys[0] + ys[ys.length - 1]) / 2 + (ys.length > 2 ? 14 : 0),
  };
}

export function renderGraphSvg(graph: GraphResponse): string {
  const layout = layoutGraph(graph);
  const edges = layout.edges
    .map((edge) => {
      const mid = midOf(edge.path);
      return `
      <path d="${edge.path}" class="edge ${edge.kind}" marker-end="url(#arrow)"/>
      <text x="${mid.x}" y="${mid.y - 4}" class="edge-label">${escapeHtml(edge.label)}</text>`;
    })
    .join('');
  const nodes = layout.nodes
    .map((node) =>
      node.kind === 'task'
        ? `
      <rect x="${node.x - 55}" y="${node.y - 16}" width="110" height="32" rx="4" class="node task"/>
      <text x="${node.x}" y="${node.y + 5}" class="node-label">${escapeHtml(node.id)}</text>`
        : `
      <ellipse cx="${node.x}" cy="${node.y}" rx="62" ry="18" class="node artifact"/>
      <text x="${node.x}" y="${node.y + 5}" class="node-label">${escapeHtml(node.id)}</text>`,
    )
    .join('');
  return `<svg viewBox="0 0 ${layout.width} ${layout.height}" xmlns="http://www.w3.org/2000/svg">
    <defs>
      <marker id="arrow" viewBox="0 0 8 8" refX="7" refY="4" markerWidth="7" markerHeight="7" orient="auto">
        <path d="M 0 0 L 8 4 L 0 8 z" class="arrow-head"/>
      </marker>
    </defs>
    ${edges}
    ${nodes}
  </svg>`;
}
