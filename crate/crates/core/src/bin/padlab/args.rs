use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "padlab", version, about = "p-adic Lie groups, horospherical dynamics and entropy-gap constants")]
pub struct Cli {
    /// The prime p.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Working p-adic precision N (digits).
    #[arg(long, global = true, default_value_t = 12)]
    pub precision: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Sl,
    Gl,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BchChoice {
    Dynkin,
    Direct,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleChoice {
    Full,
    Factored,
}

/// A diagonalizable element `a` and the group it acts on.
#[derive(Args, Debug)]
pub struct ElementArgs {
    /// Matrix literal or file holding one.
    #[arg(long = "element", alias = "a")]
    pub element: String,
    #[arg(long, value_enum, default_value_t = GroupKind::Sl)]
    pub group: GroupKind,
    /// Ambient dimension d; defaults to the size of the element.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigen-decomposition of Ad_a, entropy and modular character.
    Analyze(ElementArgs),
    /// Matrix exponential on ||X|| <= p^-2.
    Exp {
        #[arg(long)]
        matrix: String,
    },
    /// Matrix logarithm on ||g - e|| <= p^-2.
    Log {
        #[arg(long)]
        matrix: String,
    },
    /// Baker-Campbell-Hausdorff composition.
    Bch {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_enum, default_value_t = BchChoice::Both)]
        mode: BchChoice,
    },
    /// Split g into unstable and thickened-stable factors.
    Factor {
        #[command(flatten)]
        element: ElementArgs,
        /// The group element g to factor.
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 2)]
        k: i64,
    },
    /// Bowen ball levels and closed-form volume ratio.
    Bowen {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        n: u32,
    },
    /// Count Bowen balls by enumeration and compare with the closed form.
    Oracle {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        n: u32,
        /// Truncation level L; defaults to k + (n-1) max ν + 1.
        #[arg(long)]
        level: Option<i64>,
        #[arg(long, value_enum, default_value_t = OracleChoice::Full)]
        mode: OracleChoice,
        /// Largest number of lattice points FULL mode may enumerate.
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Coset representatives of the atom split.
    Atoms {
        #[command(flatten)]
        element: ElementArgs,
        /// Level k; defaults to |ν| + 2.
        #[arg(long)]
        k: Option<i64>,
    },
    /// Both sides of the entropy-gap identity for a Markov measure.
    Gap {
        /// Lab document or file: {"s", "transition"}.
        #[arg(long)]
        markov: String,
        #[arg(long)]
        nu: u32,
    },
    /// Pinsker's inequality for two probability vectors.
    Pinsker {
        /// JSON array of probabilities.
        #[arg(long = "p-vector")]
        p_vector: String,
        #[arg(long = "q-vector")]
        q_vector: String,
    },
    /// Telescoping bound for a cylinder function under a Markov measure.
    Telescope {
        #[arg(long)]
        markov: String,
        /// Lab document or file with "f"; defaults to the Markov document.
        #[arg(long)]
        f: Option<String>,
    },
    /// Spherical function Ξ(p^k) of PGL_2.
    Xi {
        #[arg(long)]
        k: u32,
    },
    /// Matrix-coefficient bound from Cartan data.
    Oh {
        /// JSON array k_1 >= ... >= k_m.
        #[arg(long, conflicts_with = "element")]
        cartan: Option<String>,
        /// Matrix whose Cartan data to use.
        #[arg(long)]
        element: Option<String>,
        #[arg(long = "dim-kv", default_value_t = 1)]
        dim_kv: u64,
        #[arg(long = "dim-kw", default_value_t = 1)]
        dim_kw: u64,
    },
    /// The constant κ of the main bound.
    Kappa {
        #[arg(long)]
        bundle: String,
    },
    /// Right-hand side of the main bound and the equidistribution rate.
    Bound {
        #[arg(long)]
        bundle: String,
        #[arg(long = "lf", default_value_t = 0)]
        l_f: u32,
        #[arg(long = "f-norm", default_value_t = 1.0)]
        f_norm: f64,
        /// Entropy gap; conflicts with --gap-report.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "gap_report")]
        gap: Option<f64>,
        /// Output of `padlab gap` to read the gap from.
        #[arg(long = "gap-report")]
        gap_report: Option<String>,
        /// Step n for the equidistribution bound.
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
}
