// Fold scrubber: a 200-step slider over the admissible fold range, driven by
// a prefetched sweep cache for smooth motion and an exact fold on release.

import { ApiClient, ServiceError } from "./api.js";
import {
    FrameRecord, LimitsResponse, RESIDUAL_WARN, SceneSpec, SwitchBranch,
} from "./types.js";

export const SLIDER_STEPS = 200;
export const PREFETCH_FRAMES = 24;

export interface ScrubberState {
    t: number;
    frame: FrameRecord;
    atMin: boolean;
    atMax: boolean;
    branches: SwitchBranch[];
    warn: boolean;              // residuals above tolerance must be visible
    approximate: boolean;       // true while showing a cached nearby frame
}

export class FoldScrubber {
    private limits: LimitsResponse | null = null;
    private cache: FrameRecord[] = [];
    faces: number[][] = [];

    constructor(private api: ApiClient, private scene: SceneSpec,
                private tube: string) {}

    async prepare(): Promise<void> {
        this.limits = await this.api.limits(this.scene, this.tube);
        const sweep = await this.api.sweep(this.scene, this.tube, PREFETCH_FRAMES);
        this.cache = sweep.frames;
        this.faces = sweep.faces;
    }

    get tMin(): number {
        if (!this.limits) throw new Error("scrubber not prepared");
        return this.limits.t_min;
    }

    get tMax(): number {
        if (!this.limits) throw new Error("scrubber not prepared");
        return this.limits.t_max;
    }

    clamp(t: number): number {
        return Math.min(this.tMax, Math.max(this.tMin, t));
    }

    tOfStep(step: number): number {
        const s = Math.min(SLIDER_STEPS, Math.max(0, Math.round(step)));
        return this.tMin + (this.tMax - this.tMin) * (s / SLIDER_STEPS);
    }

    stepOfT(t: number): number {
        const x = (this.clamp(t) - this.tMin) / (this.tMax - this.tMin);
        return Math.round(x * SLIDER_STEPS);
    }

    private state(frame: FrameRecord, t: number, approximate: boolean): ScrubberState {
        const eps = 1e-9 * Math.max(1, Math.abs(t));
        const atMin = t <= this.tMin + eps;
        const atMax = t >= this.tMax - eps;
        const branches = !this.limits ? [] :
            atMin ? this.limits.switching.min :
            atMax ? this.limits.switching.max : [];
        const r = frame.residuals;
        const warn = Math.max(r.max_edge_dev, r.max_planarity,
                              r.closure_gap ?? 0) > RESIDUAL_WARN;
        return { t, frame, atMin, atMax, branches, warn, approximate };
    }

    // While dragging: nearest prefetched frame, no network round trip.
    scrub(t: number): ScrubberState {
        const tc = this.clamp(t);
        if (this.cache.length === 0) throw new Error("scrubber not prepared");
        let best = 0;
        for (let k = 1; k < this.cache.length; k++) {
            if (Math.abs(this.cache[k].t - tc) < Math.abs(this.cache[best].t - tc)) {
                best = k;
            }
        }
        return this.state(this.cache[best], tc, true);
    }

    // On release: exact fold from the service; clamps on range errors.
    async release(t: number): Promise<ScrubberState> {
        const tc = this.clamp(t);
        try {
            const frame = await this.api.fold(this.scene, this.tube, tc);
            return this.state(frame, tc, false);
        } catch (e) {
            if (e instanceof ServiceError && e.status === 422) {
                const edge = tc > 1 ? this.tMax : this.tMin;
                const frame = await this.api.fold(this.scene, this.tube, edge);
                return this.state(frame, edge, false);
            }
            throw e;
        }
    }
}
