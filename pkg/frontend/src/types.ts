/** JSON shapes exchanged with the analysis server. */

export type Variant = "continuous" | "event" | "text" | "thumbnail";

export interface StreamInfo {
  id: string;
  recording_id: string;
  filter_id: string;
  variant: Variant;
  unit: string | null;
  file?: string;
}

export interface SampleRecord {
  t_ms: number;
  value: number;
  voiced?: boolean;
}

export interface EventRecord {
  t0_ms: number;
  t1_ms: number;
  label: string;
  p: number;
  attrs?: Record<string, unknown>;
}

export interface TextRecord {
  t0_ms: number;
  t1_ms: number;
  text: string;
  word_count: number;
}

export interface ThumbnailRecord {
  t_ms: number;
  image: string;
}

export type StreamRecord = SampleRecord | EventRecord | TextRecord | ThumbnailRecord;

export interface StreamPage {
  stream: StreamInfo & { project_id: string };
  from: number;
  to: number;
  records: StreamRecord[];
}

export interface RecordingRow {
  id: string;
  kind: "audio-wav" | "frame-sequence" | "transcript";
  duration_ms: number;
  content_digest: string;
  metadata: Record<string, unknown>;
  clock_origin: number;
  path: string;
}

export interface ProjectRow {
  project_id: string;
  name: string;
  recordings: number;
  streams: number;
}

export interface FilterRow {
  filter_id: string;
  display_name: string;
  model_id: string;
  model_version: string;
  params: Record<string, unknown>;
  input_kinds: string[];
  output_variants: string[];
}

export interface JobRow {
  job_id: string;
  project_id: string;
  recording_id: string;
  filter_id: string;
  params: Record<string, unknown>;
  state: "queued" | "running" | "done" | "failed" | "cached";
  progress: number;
  produced_stream_ids: string[];
  error: string | null;
  created_at: string;
}

export interface JobEvent {
  type: "progress" | "partial" | "done" | "failed" | "cached";
  progress?: number;
  [key: string]: unknown;
}

export type AnnotationKind = "point" | "interval";

export interface AnnotationRow {
  id: string;
  project_id: string;
  stream_id: string;
  kind: AnnotationKind;
  t0_ms: number;
  t1_ms: number;
  text: string;
  author: string;
  created_at: string;
}

export interface AnnotationDraft {
  stream_id: string;
  kind: AnnotationKind;
  t0_ms: number;
  t1_ms: number;
  text: string;
  author: string;
}

export interface TelemetryEvent {
  kind: string;
  t_video_ms: number;
  payload?: Record<string, unknown>;
}
