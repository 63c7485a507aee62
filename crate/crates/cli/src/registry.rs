//! Names, one-line descriptions and anchors of the experiments.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// The result of the paper the experiment checks.
    pub anchor: &'static str,
}

pub const EXPERIMENTS: [ExperimentInfo; 10] = [
    ExperimentInfo {
        name: "matrix-ineq-suite",
        description: "random PSD matrices against Fischer, three-block, determinant-ratio and projection-inversion",
        anchor: "Appendix: determinant inequalities det A ≤ det A_αα det A_ββ and relatives",
    },
    ExperimentInfo {
        name: "cpi-monotonicity",
        description: "compound Papangelou intensities decrease in ξ and are bounded by ∏ J_[Λ](x,x)",
        anchor: "Theorem: ĉ_Λ(α,ξ) ≥ ĉ_Λ(α,η) for ξ ⊂ η and ĉ_Λ(α,ξ) ≤ det J_[Λ](α,α)",
    },
    ExperimentInfo {
        name: "janossy-normalization",
        description: "Janossy densities integrate to 1 over all configuration sizes",
        anchor: "Janossy density σ_Λ(ξ) = det(I−K_Λ) det J_[Λ](ξ,ξ)",
    },
    ExperimentInfo {
        name: "sampler-validation",
        description: "spectral sampler moments and vacuum probability; birth-death vs spectral counts",
        anchor: "Definition: ρ(α) = det K(α,α); birth-death generator with rate c(x,ξ)",
    },
    ExperimentInfo {
        name: "domination",
        description: "increasing functionals have smaller means under the DPP than under Poisson(J(x,x))",
        anchor: "Corollary: μ ⪯ π^J",
    },
    ExperimentInfo {
        name: "vacuum-correlation",
        description: "det(I−K) on a union of disjoint windows is at most the product; Monte Carlo check",
        anchor: "Monotonicity of conditional vacuum probabilities: μ(N_Λ=0 | N_Δ=0) ≤ μ(N_Λ=0)",
    },
    ExperimentInfo {
        name: "cpi-limit",
        description: "local intensities on a large window match the renewal closed form; candidate ratios decrease",
        anchor: "Theorem: ĉ_Δ → ĉ as Δ ↑ and ĉ ≤ ĉ_*",
    },
    ExperimentInfo {
        name: "cluster-formula",
        description: "the intensity over W(α,ξ) equals the stabilised candidate ratio for finite-range kernels",
        anchor: "Proposition: ĉ_*(α,ξ) = det J(αξ_W)/det J(ξ_W) for finite-range J",
    },
    ExperimentInfo {
        name: "renewal-equivalence",
        description: "DPP spacings of the exponential kernel follow f(s) = e^{−as} d(s); det J factorises",
        anchor: "Example: the exponential-kernel DPP is the stationary renewal process μ_f",
    },
    ExperimentInfo {
        name: "percolation-curve",
        description: "spanning probabilities of the Boolean model, DPP against Poisson at matched intensity",
        anchor: "Corollary: no infinite cluster for μ when π^J does not percolate",
    },
];

pub fn find(name: &str) -> Option<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// The `list-experiments` table.
pub fn listing() -> String {
    let width = EXPERIMENTS.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for e in &EXPERIMENTS {
        out.push_str(&format!("{:width$}  {}\n{:width$}  [{}]\n", e.name, e.description, "", e.anchor));
    }
    out
}
