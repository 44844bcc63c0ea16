// Browser entry point: cross-section editor + fold scrubber wired to the DOM.

import { ApiClient } from "./api.js";
import { EditorDocument } from "./document.js";
import { FoldScrubber, SLIDER_STEPS } from "./scrubber.js";
import { Point2, SceneSpec } from "./types.js";
import { LiveValidator } from "./validation.js";
import { drawMesh, drawSection } from "./viewer.js";

const DEMO_SCENE: SceneSpec = {
    version: 1,
    cross_sections: {
        rhombus: { kind: "discrete", vertices: [[0, 0], [1, -1], [2, 0], [1, 1]] },
    },
    trajectories: {
        zig: { type: "I", points: [[0, 0], [1, 1], [2, 0], [3, 1], [4, 0]] },
    },
    tubes: { miura: { profile: "rhombus", trajectory: "zig", type: "I" } },
};

function el<T extends HTMLElement>(id: string): T {
    const e = document.getElementById(id);
    if (!e) throw new Error(`missing element #${id}`);
    return e as T;
}

async function start(): Promise<void> {
    const api = new ApiClient("");
    const doc = new EditorDocument(DEMO_SCENE);
    const sectionName = "rhombus";

    const editCanvas = el<HTMLCanvasElement>("editor");
    const meshCanvas = el<HTMLCanvasElement>("preview");
    const badgeEl = el<HTMLSpanElement>("badge");
    const classesEl = el<HTMLPreElement>("classes");
    const slider = el<HTMLInputElement>("t-slider");
    const tLabel = el<HTMLSpanElement>("t-label");
    const branchesEl = el<HTMLDivElement>("branches");
    const banner = el<HTMLDivElement>("offline");
    const ectx = editCanvas.getContext("2d")!;
    const mctx = meshCanvas.getContext("2d")!;

    let selected: number | null = null;

    const redrawSection = (): void => {
        const spec = doc.section(sectionName);
        if (spec.kind !== "discrete") return;
        drawSection(ectx, spec.vertices as Array<[number, number]>,
                    doc.offendingSegments(sectionName), selected,
                    editCanvas.width, editCanvas.height);
        const badge = doc.badge(sectionName);
        badgeEl.textContent = badge;
        badgeEl.className = `badge ${badge}`;
        const rep = doc.reports.get(sectionName);
        classesEl.textContent = rep ? rep.classes.map(
            (c, k) => `${rep.offending_classes.includes(k) ? "!!" : "  "} ` +
                `|slope| ${c.angle_deg.toFixed(3)} deg  sum ${c.oriented_sum.toExponential(3)}`
        ).join("\n") : "";
    };

    const validator = new LiveValidator(api, doc, () => {
        banner.style.display = validator.offline ? "block" : "none";
        redrawSection();
    });

    editCanvas.addEventListener("pointerdown", (ev) => {
        const spec = doc.section(sectionName);
        if (spec.kind !== "discrete") return;
        const rect = editCanvas.getBoundingClientRect();
        const mx = ev.clientX - rect.left, my = ev.clientY - rect.top;
        // nearest handle in screen space is good enough for selection
        let best = -1, bd = 144;
        spec.vertices.forEach((v, k) => {
            const d2 = (mx - v[0]) ** 2 + (my - v[1]) ** 2;
            if (d2 < bd) { best = k; bd = d2; }
        });
        selected = best >= 0 ? best : selected;
        redrawSection();
    });

    el<HTMLButtonElement>("undo").onclick = () => { doc.undo(); validator.touch(sectionName); redrawSection(); };
    el<HTMLButtonElement>("redo").onclick = () => { doc.redo(); validator.touch(sectionName); redrawSection(); };
    el<HTMLButtonElement>("nudge").onclick = () => {
        // demo edit: pull the selected (or top) vertex off-symmetry
        const spec = doc.section(sectionName);
        if (spec.kind !== "discrete") return;
        const k = selected ?? 3;
        const v = spec.vertices[k];
        const to: Point2 = [v[0] + 0.2, v[1] + 0.15];
        doc.dragVertex(sectionName, k, to);
        validator.touch(sectionName);
        redrawSection();
    };
    el<HTMLButtonElement>("save").onclick = () => {
        const blob = new Blob([doc.serialize()], { type: "application/json" });
        const a = document.createElement("a");
        a.href = URL.createObjectURL(blob);
        a.download = "scene.json";
        a.click();
    };

    const scrubber = new FoldScrubber(api, doc.getScene(), "miura");
    await scrubber.prepare();
    slider.min = "0";
    slider.max = String(SLIDER_STEPS);
    slider.value = String(scrubber.stepOfT(1.0));

    const view = { yaw: 0.7, pitch: 0.5, zoom: 0.8 };
    const show = (state: ReturnType<FoldScrubber["scrub"]>): void => {
        tLabel.textContent = `t = ${state.t.toFixed(4)}` +
            (state.warn ? "  [RESIDUAL WARNING]" : "") +
            (state.atMin ? "  [lower flexion limit]" : "") +
            (state.atMax ? "  [upper flexion limit]" : "");
        drawMesh(mctx, state.frame.vertices, scrubber.faces, view,
                 meshCanvas.width, meshCanvas.height, state.warn);
        branchesEl.innerHTML = "";
        for (const b of state.branches) {
            const btn = document.createElement("button");
            btn.textContent = `${b.label}${b.theoretical ? " (theoretical)" : ""}`;
            btn.title = b.kind === "vertical"
                ? "vertical switching causes self-intersection" : b.label;
            branchesEl.appendChild(btn);
        }
    };

    slider.addEventListener("input", () => {
        show(scrubber.scrub(scrubber.tOfStep(Number(slider.value))));
    });
    slider.addEventListener("change", () => {
        void scrubber.release(scrubber.tOfStep(Number(slider.value))).then(show);
    });

    validator.touch(sectionName);
    redrawSection();
    show(scrubber.scrub(1.0));
}

window.addEventListener("DOMContentLoaded", () => { void start(); });
