import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { EditorDocument } from "../src/document.js";
import { SceneSpec } from "../src/types.js";
import { LiveValidator } from "../src/validation.js";
import { makeMockFetch } from "./mock_service.js";

const SCENE: SceneSpec = {
    version: 1,
    cross_sections: {
        rhombus: { kind: "discrete", vertices: [[0, 0], [1, -1], [2, 0], [1, 1]] },
    },
    trajectories: {},
    tubes: {},
};

describe("LiveValidator", () => {
    beforeEach(() => { vi.useFakeTimers(); });
    afterEach(() => { vi.useRealTimers(); });

    it("flips the badge to invalid within 300 ms of an asymmetric edit", async () => {
        const { fetch } = makeMockFetch({ latencyMs: 40 });
        const doc = new EditorDocument(SCENE);
        const validator = new LiveValidator(new ApiClient("", fetch), doc);

        validator.touch("rhombus");
        await vi.advanceTimersByTimeAsync(300);
        expect(doc.badge("rhombus")).toBe("valid");

        doc.dragVertex("rhombus", 3, [1.4, 1.25]);   // off-symmetry
        validator.touch("rhombus");
        await vi.advanceTimersByTimeAsync(300);      // debounce 150 + latency 40
        expect(doc.badge("rhombus")).toBe("invalid");
        expect(doc.offendingSegments("rhombus").length).toBeGreaterThan(0);

        doc.undo();                                  // restore symmetry
        validator.touch("rhombus");
        await vi.advanceTimersByTimeAsync(300);
        expect(doc.badge("rhombus")).toBe("valid");
    });

    it("collapses rapid edits into one request (debounce <= 150 ms)", async () => {
        const { fetch, calls } = makeMockFetch();
        const doc = new EditorDocument(SCENE);
        const validator = new LiveValidator(new ApiClient("", fetch), doc);
        for (let k = 0; k < 10; k++) {
            doc.dragVertex("rhombus", 3, [1 + k * 0.01, 1]);
            validator.touch("rhombus");
            await vi.advanceTimersByTimeAsync(30);
        }
        await vi.advanceTimersByTimeAsync(400);
        expect(calls.filter((u) => u.endsWith("/validate")).length).toBe(1);
    });

    it("splitting a segment into collinear halves keeps the verdict", async () => {
        const { fetch } = makeMockFetch();
        const doc = new EditorDocument(SCENE);
        const validator = new LiveValidator(new ApiClient("", fetch), doc);
        doc.insertVertex("rhombus", 0);              // midpoint: collinear halves
        validator.touch("rhombus");
        await vi.advanceTimersByTimeAsync(300);
        expect(doc.badge("rhombus")).toBe("valid");
    });

    it("unreachable service raises the offline banner, edits stay buffered", async () => {
        const { fetch } = makeMockFetch({ offline: true });
        const doc = new EditorDocument(SCENE);
        const validator = new LiveValidator(new ApiClient("", fetch), doc);
        doc.dragVertex("rhombus", 3, [1.4, 1.25]);
        validator.touch("rhombus");
        await vi.advanceTimersByTimeAsync(300);
        expect(validator.offline).toBe(true);
        expect(doc.badge("rhombus")).toBe("unknown");
        // the edit itself is still in the document
        const s = doc.section("rhombus");
        if (s.kind !== "discrete") throw new Error("unexpected");
        expect(s.vertices[3]).toEqual([1.4, 1.25]);
    });
});
