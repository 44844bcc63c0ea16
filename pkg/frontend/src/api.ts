// Thin client for the geometry service. All math lives server-side; the UI
// never computes fold states itself.

import {
    CrossSectionSpec, FrameRecord, LimitsResponse, MeshResponse, SceneSpec,
    SweepResponse, ValidationReport,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
    constructor(message: string, public status: number, public feature?: string) {
        super(message);
    }
}

export class ApiClient {
    constructor(private base: string = "", private fetcher: FetchLike =
        (u, i) => fetch(u, i)) {}

    private async post<T>(path: string, body: unknown): Promise<T> {
        const r = await this.fetcher(this.base + path, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!r.ok) {
            let detail = `${r.status}`;
            let feature: string | undefined;
            try {
                const doc = await r.json();
                detail = doc.detail ?? detail;
                feature = doc.feature;
            } catch { /* body not json */ }
            throw new ServiceError(detail, r.status, feature);
        }
        return r.json() as Promise<T>;
    }

    validateSection(section: CrossSectionSpec): Promise<ValidationReport> {
        return this.post("/validate", { cross_section: section });
    }

    buildTube(scene: SceneSpec, tube: string): Promise<MeshResponse> {
        return this.post("/tube", { scene, tube });
    }

    fold(scene: SceneSpec, tube: string, t: number): Promise<FrameRecord> {
        return this.post("/fold", { scene, tube, t });
    }

    sweep(scene: SceneSpec, tube: string, frames: number): Promise<SweepResponse> {
        return this.post("/sweep", { scene, tube, frames });
    }

    limits(scene: SceneSpec, tube: string): Promise<LimitsResponse> {
        return this.post("/limits", { scene, tube });
    }
}
