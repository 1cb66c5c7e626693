//! Discrete operators: the spectral fractional heat operator, its causal
//! inverse, pointwise singular integrals and the extension problem.

pub mod extension;
pub mod ground_state;
pub mod phi;
pub mod spectral;
pub mod symbol_check;
pub mod volterra;

pub use spectral::{adjoint_gap, apply_frac_laplacian, apply_hs_spectral, HeatKernelY, SymbolHs, IMAG_RESIDUE_TOL};
pub use symbol_check::{kernel_symbol_closed_form, symbol_of_kernel_check, truncated_symbol_check, KernelTransform, SymbolCheck, SYMBOL_BOX};
pub use volterra::{apply_js, inversion_error, semigroup_error, JsOperator, LagConvolution};
pub use ground_state::{
    annulus_nodes, apply_ls, ground_state_residual, radial_flap_check, radial_power_flap, FlapCheck, GroundStateResidual, LsQuadrature,
    SpaceTimeFn, ANNULUS,
};
pub use extension::{extend_parabolic, extension_check, Extension, ExtensionCheck};
pub use phi::{phi_profile, PhiProfile};
