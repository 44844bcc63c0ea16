// Editor document: a scene mirror with selection, undo, and validity badges.
// Every state serializes to a schema-valid scene; undo/redo restores the
// serialized form byte for byte.

import { CrossSectionSpec, Point2, SceneSpec, ValidationReport } from "./types.js";

export type Badge = "valid" | "invalid" | "at-limit" | "unknown";

export interface Selection {
    section: string | null;
    vertex: number | null;
}

function deepCopy<T>(x: T): T {
    return JSON.parse(JSON.stringify(x)) as T;
}

export function emptyScene(): SceneSpec {
    return { version: 1, cross_sections: {}, trajectories: {}, tubes: {} };
}

export class EditorDocument {
    private scene: SceneSpec;
    private undoStack: string[] = [];
    private redoStack: string[] = [];
    selection: Selection = { section: null, vertex: null };
    badges: Map<string, Badge> = new Map();
    reports: Map<string, ValidationReport> = new Map();

    constructor(scene?: SceneSpec) {
        this.scene = scene ? deepCopy(scene) : emptyScene();
    }

    serialize(): string {
        return JSON.stringify(this.scene);
    }

    static load(json: string): EditorDocument {
        return new EditorDocument(JSON.parse(json) as SceneSpec);
    }

    getScene(): SceneSpec {
        return this.scene;
    }

    section(name: string): CrossSectionSpec {
        const s = this.scene.cross_sections[name];
        if (!s) throw new Error(`no cross-section named ${name}`);
        return s;
    }

    private snapshot(): void {
        this.undoStack.push(this.serialize());
        this.redoStack.length = 0;
    }

    canUndo(): boolean { return this.undoStack.length > 0; }
    canRedo(): boolean { return this.redoStack.length > 0; }

    undo(): void {
        const prev = this.undoStack.pop();
        if (prev === undefined) return;
        this.redoStack.push(this.serialize());
        this.scene = JSON.parse(prev) as SceneSpec;
    }

    redo(): void {
        const next = this.redoStack.pop();
        if (next === undefined) return;
        this.undoStack.push(this.serialize());
        this.scene = JSON.parse(next) as SceneSpec;
    }

    // -- cross-section editing ------------------------------------------------

    addSection(name: string, spec: CrossSectionSpec): void {
        this.snapshot();
        this.scene.cross_sections[name] = deepCopy(spec);
        this.badges.set(name, "unknown");
    }

    private editableVertices(name: string): Point2[] {
        const s = this.section(name);
        if (s.kind !== "discrete") {
            throw new Error("only discrete sections are vertex-editable");
        }
        return s.vertices;
    }

    dragVertex(name: string, index: number, to: Point2): void {
        const v = this.editableVertices(name);
        if (index < 0 || index >= v.length) throw new Error("vertex out of range");
        this.snapshot();
        v[index] = [to[0], to[1]];
        this.badges.set(name, "unknown");
    }

    insertVertex(name: string, afterIndex: number, at?: Point2): void {
        const v = this.editableVertices(name);
        const n = v.length;
        if (afterIndex < 0 || afterIndex >= n) throw new Error("vertex out of range");
        this.snapshot();
        const a = v[afterIndex];
        const b = v[(afterIndex + 1) % n];
        const p: Point2 = at ?? [(a[0] + b[0]) / 2, (a[1] + b[1]) / 2];
        v.splice(afterIndex + 1, 0, p);
        this.badges.set(name, "unknown");
    }

    deleteVertex(name: string, index: number): void {
        const v = this.editableVertices(name);
        if (v.length <= 3) throw new Error("a section needs at least 3 vertices");
        if (index < 0 || index >= v.length) throw new Error("vertex out of range");
        this.snapshot();
        v.splice(index, 1);
        this.badges.set(name, "unknown");
    }

    applyReport(name: string, report: ValidationReport): void {
        this.reports.set(name, report);
        this.badges.set(name,
            !report.valid ? "invalid" : report.at_flexion_limit ? "at-limit" : "valid");
    }

    badge(name: string): Badge {
        return this.badges.get(name) ?? "unknown";
    }

    // Segment indices to highlight on the drawing: members of offending classes.
    offendingSegments(name: string): number[] {
        const rep = this.reports.get(name);
        if (!rep || rep.valid) return [];
        const out: number[] = [];
        for (const k of rep.offending_classes) {
            out.push(...rep.classes[k].members);
        }
        return out.sort((x, y) => x - y);
    }
}
