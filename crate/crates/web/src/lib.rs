//! WebAssembly bindings for the browser demo in `www/`.

mod studio;

pub use studio::{Rendering, Studio};
use wasm_bindgen::prelude::*;

fn js_err(e: wavegest::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub struct WaveStudio {
    inner: Studio,
}

#[wasm_bindgen]
impl WaveStudio {
    /// Generates demonstrations from `seed` and trains a model.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, harmonics: usize) -> Result<WaveStudio, JsValue> {
        Studio::train(seed.into(), harmonics).map(|inner| WaveStudio { inner }).map_err(js_err)
    }

    pub fn dofs(&self) -> usize {
        self.inner.dofs()
    }

    pub fn harmonics(&self) -> usize {
        self.inner.harmonics()
    }

    /// Amplitudes laid out joint-major, `dofs() * harmonics()` long.
    pub fn spectrum(&self) -> Vec<f64> {
        self.inner.spectrum()
    }

    #[wasm_bindgen(js_name = clampAmplitude)]
    pub fn clamp_amplitude(&mut self, dof: usize, harmonic: usize, value: f64) -> Result<(), JsValue> {
        self.inner.clamp_amplitude(dof, harmonic, value).map_err(js_err)
    }

    /// `[median amplitude, log-amplitude standard deviation]` of one harmonic.
    #[wasm_bindgen(js_name = amplitudeStats)]
    pub fn amplitude_stats(&self, dof: usize, harmonic: usize) -> Result<Vec<f64>, JsValue> {
        let (median, spread) = self.inner.amplitude_stats(dof, harmonic).map_err(js_err)?;
        Ok(vec![median, spread])
    }

    pub fn release(&mut self) {
        self.inner.release();
    }

    #[wasm_bindgen(js_name = clampCount)]
    pub fn clamp_count(&self) -> usize {
        self.inner.clamp_count()
    }

    /// SVG overlay of one sampled gesture.
    pub fn render(&self, seed: u32, tempo: f64, stride: usize) -> Result<RenderResult, JsValue> {
        self.inner.render(seed.into(), tempo, stride).map(RenderResult).map_err(js_err)
    }
}

#[wasm_bindgen]
pub struct RenderResult(Rendering);

#[wasm_bindgen]
impl RenderResult {
    #[wasm_bindgen(getter)]
    pub fn svg(&self) -> String {
        self.0.svg.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn frames(&self) -> usize {
        self.0.frames
    }

    #[wasm_bindgen(getter)]
    pub fn violations(&self) -> usize {
        self.0.violations
    }
}
