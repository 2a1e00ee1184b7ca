/** Categorical label filtering for event tracks.
 *
 * Filtering dims rather than hides: non-selected events stay visible at a
 * fixed low opacity so the analyst keeps the surrounding context.  An empty
 * selection means "no filter", i.e. everything at full opacity.
 */

export const DIM_OPACITY = 0.2;

export function eventOpacity(selected: ReadonlySet<string>, label: string): number {
  if (selected.size === 0) return 1.0;
  return selected.has(label) ? 1.0 : DIM_OPACITY;
}

export class LabelFilter {
  private selected = new Set<string>();
  private listeners: Array<() => void> = [];

  toggle(label: string): void {
    if (this.selected.has(label)) this.selected.delete(label);
    else this.selected.add(label);
    this.emit();
  }

  clear(): void {
    if (this.selected.size === 0) return;
    this.selected.clear();
    this.emit();
  }

  isSelected(label: string): boolean {
    return this.selected.has(label);
  }

  get selection(): ReadonlySet<string> {
    return this.selected;
  }

  opacity(label: string): number {
    return eventOpacity(this.selected, label);
  }

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }
}
