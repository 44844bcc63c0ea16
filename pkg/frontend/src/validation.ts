// Debounced live validation: every edit schedules a /validate call; rapid
// edits collapse into one request, stale responses lose to newer edits.

import { ApiClient } from "./api.js";
import { EditorDocument } from "./document.js";

export const DEBOUNCE_MS = 150;

export class LiveValidator {
    private timer: ReturnType<typeof setTimeout> | null = null;
    private epoch = 0;
    offline = false;
    private buffered: string | null = null;

    constructor(private api: ApiClient, private doc: EditorDocument,
                private onUpdate: (name: string) => void = () => {},
                private debounceMs: number = DEBOUNCE_MS) {}

    // Call after every edit of the named section.
    touch(name: string): void {
        this.buffered = name;
        if (this.timer !== null) clearTimeout(this.timer);
        this.timer = setTimeout(() => void this.flush(), this.debounceMs);
    }

    async flush(): Promise<void> {
        if (this.timer !== null) {
            clearTimeout(this.timer);
            this.timer = null;
        }
        const name = this.buffered;
        if (name === null) return;
        const my = ++this.epoch;
        const spec = this.doc.section(name);
        try {
            const rep = await this.api.validateSection(spec);
            if (my !== this.epoch) return;        // superseded by a newer edit
            this.offline = false;
            this.doc.applyReport(name, rep);
            this.onUpdate(name);
        } catch (e) {
            if (my !== this.epoch) return;
            // service unreachable: keep edits buffered, surface the banner
            this.offline = true;
            this.onUpdate(name);
        }
    }
}
