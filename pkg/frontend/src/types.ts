/** Resource shapes mirrored from the engine's HTTP API. */

export type PartName = "template" | "style" | "script";

export interface Bundle {
  filename: string;
  template: string;
  style: string;
  script: string;
}

export type NodeKind = "ai-generated" | "manual-edit" | "correction";

export interface RepairEntry {
  category: string;
  description: string;
  before_span: [number, number] | null;
  after_location: string | null;
}

export interface NodeResource {
  id: string;
  parent_id: string | null;
  kind: NodeKind;
  prompt: string;
  response_summary: string;
  bundle: Bundle;
  repair: { entries: RepairEntry[]; flags: string[] };
  created_at: string;
  filename?: string;
  is_active?: boolean;
  lazy_findings?: { part: string; line: number; pattern: string }[];
  lazy_retried?: boolean;
}

export interface TreeResource {
  root_id: string;
  active_id: string;
  nodes: Record<string, NodeResource>;
  filename: string;
  sequence: number;
}

export interface ProjectResource {
  project_id: string;
  sequence: number;
  settings: {
    model_name: string;
    max_correction_rounds: number;
    context_message_cap: number;
  };
  trees: Record<string, { root_id: string; active_id: string; node_count: number }>;
}

export interface StyleChange {
  op: "added" | "removed" | "changed";
  selector: string;
  property: string;
  before: string | null;
  after: string | null;
}

export interface MarkupChange {
  op: "added" | "removed" | "changed";
  path: string;
  detail: string;
}

export interface ScriptChange {
  op: "added" | "removed" | "changed";
  lineRange: { from: [number, number]; to: [number, number] };
  beforeText: string | null;
  afterText: string | null;
}

export interface DiffResource {
  styleChanges: StyleChange[];
  markupChanges: MarkupChange[];
  scriptChanges: ScriptChange[];
  fallbacks: string[];
  rendered: string;
}

export type ValueKind = "color" | "length" | "duration" | "number" | "timing-function" | "enum";

export interface ParameterResource {
  id: string;
  part: string;
  location: { selector: string; property: string; occurrence: number };
  valueKind: ValueKind;
  currentValue: string;
  unit: string;
  bounds: [number, number, number] | null;
  options: string[];
}

export interface CorrectionRoundResource {
  video_ref: string;
  verdict: { satisfied: boolean; unmet: string[]; rationale: string } | null;
  follow_up_prompt: string | null;
  result_node_id: string | null;
}

export interface CorrectionRunResource {
  start_node_id: string;
  rounds: CorrectionRoundResource[];
  terminal: string;
  error: string | null;
}

export interface EventResource {
  project_id: string;
  sequence: number;
  active: Record<string, string>;
}
