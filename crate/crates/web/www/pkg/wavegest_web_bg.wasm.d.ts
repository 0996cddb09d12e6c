/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_renderresult_free: (a: number, b: number) => void;
export const __wbg_wavestudio_free: (a: number, b: number) => void;
export const renderresult_frames: (a: number) => number;
export const renderresult_svg: (a: number) => [number, number];
export const renderresult_violations: (a: number) => number;
export const wavestudio_amplitudeStats: (a: number, b: number, c: number) => [number, number, number, number];
export const wavestudio_clampAmplitude: (a: number, b: number, c: number, d: number) => [number, number];
export const wavestudio_clampCount: (a: number) => number;
export const wavestudio_dofs: (a: number) => number;
export const wavestudio_harmonics: (a: number) => number;
export const wavestudio_new: (a: number, b: number) => [number, number, number];
export const wavestudio_release: (a: number) => void;
export const wavestudio_render: (a: number, b: number, c: number, d: number) => [number, number, number];
export const wavestudio_spectrum: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
