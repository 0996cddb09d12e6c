/* tslint:disable */
/* eslint-disable */

export class RenderResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly frames: number;
    readonly svg: string;
    readonly violations: number;
}

export class WaveStudio {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[median amplitude, log-amplitude standard deviation]` of one harmonic.
     */
    amplitudeStats(dof: number, harmonic: number): Float64Array;
    clampAmplitude(dof: number, harmonic: number, value: number): void;
    clampCount(): number;
    dofs(): number;
    harmonics(): number;
    /**
     * Generates demonstrations from `seed` and trains a model.
     */
    constructor(seed: number, harmonics: number);
    release(): void;
    /**
     * SVG overlay of one sampled gesture.
     */
    render(seed: number, tempo: number, stride: number): RenderResult;
    /**
     * Amplitudes laid out joint-major, `dofs() * harmonics()` long.
     */
    spectrum(): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_renderresult_free: (a: number, b: number) => void;
    readonly __wbg_wavestudio_free: (a: number, b: number) => void;
    readonly renderresult_frames: (a: number) => number;
    readonly renderresult_svg: (a: number) => [number, number];
    readonly renderresult_violations: (a: number) => number;
    readonly wavestudio_amplitudeStats: (a: number, b: number, c: number) => [number, number, number, number];
    readonly wavestudio_clampAmplitude: (a: number, b: number, c: number, d: number) => [number, number];
    readonly wavestudio_clampCount: (a: number) => number;
    readonly wavestudio_dofs: (a: number) => number;
    readonly wavestudio_harmonics: (a: number) => number;
    readonly wavestudio_new: (a: number, b: number) => [number, number, number];
    readonly wavestudio_release: (a: number) => void;
    readonly wavestudio_render: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly wavestudio_spectrum: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
