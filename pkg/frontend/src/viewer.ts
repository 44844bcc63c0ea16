// Minimal canvas mesh viewer: orthographic projection with painter's sort.

export interface ViewAngles {
    yaw: number;
    pitch: number;
    zoom: number;
}

export function projectVertices(flat: number[], view: ViewAngles,
                                width: number, height: number):
        { pts: Array<[number, number]>; depth: number[] } {
    const cy = Math.cos(view.yaw), sy = Math.sin(view.yaw);
    const cp = Math.cos(view.pitch), sp = Math.sin(view.pitch);
    const n = flat.length / 3;
    const pts: Array<[number, number]> = [];
    const depth: number[] = [];
    let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
    const raw: Array<[number, number, number]> = [];
    for (let k = 0; k < n; k++) {
        const x = flat[3 * k], y = flat[3 * k + 1], z = flat[3 * k + 2];
        const rx = cy * x + sy * y;
        const ry = -sy * x + cy * y;
        const u = rx;
        const v = cp * z - sp * ry;
        const d = cp * ry + sp * z;
        raw.push([u, v, d]);
        minX = Math.min(minX, u); maxX = Math.max(maxX, u);
        minY = Math.min(minY, v); maxY = Math.max(maxY, v);
    }
    const span = Math.max(maxX - minX, maxY - minY, 1e-9);
    const s = view.zoom * Math.min(width, height) / span;
    const cx = (minX + maxX) / 2, cv = (minY + maxY) / 2;
    for (const [u, v, d] of raw) {
        pts.push([width / 2 + s * (u - cx), height / 2 - s * (v - cv)]);
        depth.push(d);
    }
    return { pts, depth };
}

export function drawMesh(ctx: CanvasRenderingContext2D, flat: number[],
                         faces: number[][], view: ViewAngles,
                         width: number, height: number, warn: boolean): void {
    ctx.clearRect(0, 0, width, height);
    const { pts, depth } = projectVertices(flat, view, width, height);
    const order = faces
        .map((f, i) => ({ i, d: f.reduce((a, k) => a + depth[k], 0) / f.length }))
        .sort((a, b) => a.d - b.d);
    for (const { i } of order) {
        const f = faces[i];
        ctx.beginPath();
        ctx.moveTo(pts[f[0]][0], pts[f[0]][1]);
        for (let k = 1; k < f.length; k++) ctx.lineTo(pts[f[k]][0], pts[f[k]][1]);
        ctx.closePath();
        ctx.fillStyle = warn ? "rgba(217,127,127,0.85)" : "rgba(127,178,217,0.85)";
        ctx.strokeStyle = "#223";
        ctx.lineWidth = 1;
        ctx.fill();
        ctx.stroke();
    }
}

export function drawSection(ctx: CanvasRenderingContext2D,
                            vertices: Array<[number, number]>,
                            offending: number[], selected: number | null,
                            width: number, height: number): void {
    ctx.clearRect(0, 0, width, height);
    if (vertices.length === 0) return;
    let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
    for (const [x, z] of vertices) {
        minX = Math.min(minX, x); maxX = Math.max(maxX, x);
        minY = Math.min(minY, z); maxY = Math.max(maxY, z);
    }
    const span = Math.max(maxX - minX, maxY - minY, 1e-9);
    const s = 0.8 * Math.min(width, height) / span;
    const toPx = ([x, z]: [number, number]): [number, number] =>
        [width / 2 + s * (x - (minX + maxX) / 2),
         height / 2 - s * (z - (minY + maxY) / 2)];
    const bad = new Set(offending);
    const n = vertices.length;
    for (let k = 0; k < n; k++) {
        const a = toPx(vertices[k]);
        const b = toPx(vertices[(k + 1) % n]);
        ctx.beginPath();
        ctx.moveTo(a[0], a[1]);
        ctx.lineTo(b[0], b[1]);
        ctx.strokeStyle = bad.has(k) ? "#d22" : "#1a6";
        ctx.lineWidth = bad.has(k) ? 3 : 2;
        ctx.stroke();
    }
    for (let k = 0; k < n; k++) {
        const [px, py] = toPx(vertices[k]);
        ctx.beginPath();
        ctx.arc(px, py, k === selected ? 6 : 4, 0, 2 * Math.PI);
        ctx.fillStyle = k === selected ? "#f80" : "#248";
        ctx.fill();
    }
}
