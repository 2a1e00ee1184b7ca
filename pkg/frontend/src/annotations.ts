/** Client-side annotation state with optimistic creation.
 *
 * A new annotation shows up in the table immediately under a temporary id,
 * then is reconciled against the server response: replaced by the stored
 * row on success, rolled back on failure.  The table therefore always
 * reflects either the server state or the server state plus in-flight
 * rows, never a stale mix.
 */

import type { AnnotationDraft, AnnotationRow } from "./types.js";

export interface AnnotationApi {
  listAnnotations(projectId: string): Promise<AnnotationRow[]>;
  createAnnotation(projectId: string, draft: AnnotationDraft): Promise<AnnotationRow>;
  deleteAnnotation(projectId: string, annotationId: string): Promise<void>;
}

export class AnnotationStore {
  private committed: AnnotationRow[] = [];
  private pending = new Map<string, AnnotationRow>();
  private seq = 0;
  private listeners: Array<() => void> = [];

  constructor(private api: AnnotationApi, readonly projectId: string) {}

  /** Committed rows plus optimistic rows, in timeline order. */
  rows(): AnnotationRow[] {
    const all = [...this.committed, ...this.pending.values()];
    all.sort((x, y) => x.t0_ms - y.t0_ms
      || x.created_at.localeCompare(y.created_at)
      || x.id.localeCompare(y.id));
    return all;
  }

  isPending(annotationId: string): boolean {
    return this.pending.has(annotationId);
  }

  async refresh(): Promise<void> {
    this.committed = await this.api.listAnnotations(this.projectId);
    this.emit();
  }

  async create(draft: AnnotationDraft): Promise<AnnotationRow> {
    const tempId = `pending-${++this.seq}`;
    this.pending.set(tempId, {
      ...draft,
      id: tempId,
      project_id: this.projectId,
      created_at: new Date().toISOString(),
    });
    this.emit();
    try {
      const row = await this.api.createAnnotation(this.projectId, draft);
      this.pending.delete(tempId);
      this.committed.push(row);
      this.emit();
      return row;
    } catch (err) {
      this.pending.delete(tempId);
      this.emit();
      throw err;
    }
  }

  async remove(annotationId: string): Promise<void> {
    await this.api.deleteAnnotation(this.projectId, annotationId);
    this.committed = this.committed.filter((a) => a.id !== annotationId);
    this.emit();
  }

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }
}
