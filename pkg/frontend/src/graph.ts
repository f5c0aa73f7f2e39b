/** Node-link layout for the plan graph: BFS layers from the initial
 * state, nodes stacked within a layer, goal nodes flagged for styling. */

import type { GraphEdge, GraphNode, PlanGraph } from "./api.js";

export interface PositionedNode extends GraphNode {
  layer: number;
  row: number;
  x: number;
  y: number;
}

export interface GraphLayout {
  nodes: PositionedNode[];
  edges: GraphEdge[];
  width: number;
  height: number;
}

const COLUMN_GAP = 170;
const ROW_GAP = 58;
const MARGIN = 40;

export function layoutGraph(graph: PlanGraph): GraphLayout {
  const out = new Map<string, string[]>();
  for (const edge of graph.edges) {
    const targets = out.get(edge.source) ?? [];
    targets.push(edge.target);
    out.set(edge.source, targets);
  }

  const layer = new Map<string, number>();
  const queue: string[] = [];
  for (const node of graph.nodes) {
    if (node.initial) {
      layer.set(node.id, 0);
      queue.push(node.id);
    }
  }
  while (queue.length > 0) {
    const id = queue.shift() as string;
    const depth = layer.get(id) as number;
    for (const target of out.get(id) ?? []) {
      if (!layer.has(target)) {
        layer.set(target, depth + 1);
        queue.push(target);
      }
    }
  }
  // Anything unreachable from the initial state parks on a trailing layer.
  const deepest = Math.max(0, ...layer.values());
  for (const node of graph.nodes) {
    if (!layer.has(node.id)) layer.set(node.id, deepest + 1);
  }

  const rows = new Map<number, number>();
  const nodes: PositionedNode[] = [...graph.nodes]
    .sort((a, b) =>
      (layer.get(a.id) as number) - (layer.get(b.id) as number)
      || a.id.localeCompare(b.id))
    .map((node) => {
      const depth = layer.get(node.id) as number;
      const row = rows.get(depth) ?? 0;
      rows.set(depth, row + 1);
      return {
        ...node,
        layer: depth,
        row,
        x: MARGIN + depth * COLUMN_GAP,
        y: MARGIN + row * ROW_GAP,
      };
    });

  const width = MARGIN * 2 + Math.max(0, ...nodes.map((n) => n.x));
  const height = MARGIN * 2 + Math.max(0, ...nodes.map((n) => n.y));
  return { nodes, edges: graph.edges, width, height };
}
