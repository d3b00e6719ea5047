// Debounce plus a latest-wins runner: while one request is in flight,
// further slider moves replace the pending one instead of queueing up.

export function debounce<F extends (...args: any[]) => void>(fn: F, ms: number) {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return function (this: ThisParameterType<F>, ...args: Parameters<F>) {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = undefined;
      fn.apply(this, args);
    }, ms);
  };
}

/** Runs async jobs one at a time; a job submitted while another is running
 * supersedes any not-yet-started job. Results of superseded jobs are
 * dropped. */
export class LatestWins<T> {
  private running = false;
  private pending: (() => Promise<T>) | null = null;

  async submit(job: () => Promise<T>, onDone: (result: T) => void, onError?: (err: unknown) => void): Promise<void> {
    this.pending = job;
    if (this.running) return;
    this.running = true;
    try {
      while (this.pending) {
        const next = this.pending;
        this.pending = null;
        try {
          const result = await next();
          if (!this.pending) onDone(result); // superseded results are stale
        } catch (err) {
          if (!this.pending && onError) onError(err);
        }
      }
    } finally {
      this.running = false;
    }
  }
}
