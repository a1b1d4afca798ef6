/** Fake clock + scripted transport for the state machine tests. */
export class FakeClock {
    now = 0;
    nextHandle = 1;
    pending = new Map();
    schedule(fn, ms) {
        const handle = this.nextHandle++;
        this.pending.set(handle, { at: this.now + ms, fn });
        return handle;
    }
    cancel(handle) {
        this.pending.delete(handle);
    }
    /** Advance time, firing timers in order. */
    async advance(ms) {
        const target = this.now + ms;
        for (;;) {
            const due = [...this.pending.entries()]
                .filter(([, t]) => t.at <= target)
                .sort((a, b) => a[1].at - b[1].at)[0];
            if (!due)
                break;
            this.pending.delete(due[0]);
            this.now = due[1].at;
            due[1].fn();
            await drainMicrotasks();
        }
        this.now = target;
    }
    get pendingCount() {
        return this.pending.size;
    }
}
export async function drainMicrotasks() {
    for (let i = 0; i < 20; i++) {
        await Promise.resolve();
    }
}
export function gridTemplate(name = "frontal") {
    const points = [];
    for (let i = 0; i < 68; i++) {
        points.push([(i % 10) * 0.1 + 0.05, Math.floor(i / 10) * 0.1 + 0.05]);
    }
    return { name, points };
}
export class ScriptedTransport {
    templateList;
    requests = [];
    autoRespond = true;
    counter = 0;
    constructor(templateList = [gridTemplate()]) {
        this.templateList = templateList;
    }
    templates() {
        return Promise.resolve(this.templateList);
    }
    synthesize(request) {
        return new Promise((resolve, reject) => {
            const entry = { request, resolve, reject };
            this.requests.push(entry);
            if (this.autoRespond) {
                entry.resolve(this.makeResponse());
            }
        });
    }
    makeResponse() {
        this.counter += 1;
        return {
            image: `png-${this.counter}`,
            gender_score: 0.5,
            latency_ms: 1.0,
        };
    }
}
