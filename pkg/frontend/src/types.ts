// Wire types mirroring the service's scene schema and responses.

export type Point2 = [number, number];

export interface DiscreteSection {
    kind: "discrete";
    vertices: Point2[];
}

export interface GeneratedSection {
    kind: "generated";
    shape: string;
    params: Record<string, number>;
}

export type CrossSectionSpec = DiscreteSection | GeneratedSection;

export interface TrajectorySpec {
    type: "I" | "II" | "III";
    points?: Point2[];
    closed?: boolean;
    axis_x?: number;
    angles_deg?: number[];
    factors?: number[];
    prism?: Point2[];
}

export interface TubeSpec {
    profile: string;
    trajectory: string;
    type?: "I" | "II" | "III";
    profile_density?: number;
    trajectory_density?: number;
    closed_trajectory?: boolean;
}

export interface SceneSpec {
    version: 1;
    cross_sections: Record<string, CrossSectionSpec>;
    trajectories: Record<string, TrajectorySpec>;
    tubes: Record<string, TubeSpec>;
    assemblies?: Record<string, unknown>;
}

export interface SlopeClass {
    angle_deg: number;
    members: number[];
    oriented_sum: number;
}

export interface ValidationReport {
    valid: boolean;
    at_flexion_limit?: boolean;
    classes: SlopeClass[];
    offending_classes: number[];
    notes?: string[];
}

export interface ResidualSummary {
    max_edge_dev: number;
    max_planarity: number;
    closure_gap?: number;
    closure_gap_trajectory?: number;
}

export interface FrameRecord {
    t: number;
    shape: [number, number];
    vertices: number[];
    residuals: ResidualSummary;
    flags: Record<string, boolean>;
}

export interface MeshResponse {
    type: string;
    shape: [number, number];
    vertices: number[];
    faces: number[][];
    fold_range: { t_min: number; t_max: number; notes: string[] };
}

export interface SwitchBranch {
    kind: "horizontal" | "vertical";
    label: string;
    flipped_classes: number[];
    theoretical: boolean;
}

export interface LimitsResponse {
    t_min: number;
    t_max: number;
    limit_min: [string, number] | null;
    limit_max: [string, number] | null;
    notes: string[];
    switching: { min: SwitchBranch[]; max: SwitchBranch[] };
}

export interface SweepResponse {
    frames: FrameRecord[];
    faces: number[][];
    t_min: number;
    t_max: number;
}

// Residuals above this need a visible warning badge in every view.
export const RESIDUAL_WARN = 1e-8;
