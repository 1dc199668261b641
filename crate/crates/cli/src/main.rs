use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fairdiv_core::check::{check_ef, check_ef1, check_efm, check_ef_mixed};
use fairdiv_core::generate::{self, Family, FamilyParams, Generated};
use fairdiv_core::graph::component_toposort;
use fairdiv_core::hardness::{brute_force_fair_search, DEFAULT_BUDGET};
use fairdiv_core::indivisible::{
    cwma, doubly_monotone_ef1, index_order, naive_envy_cycle_elimination, round_robin,
    top_trading_envy_cycle_elimination, CycleChooser, FirstCycle,
};
use fairdiv_core::mixed::{
    efm_cake_phase, efm_doubly_monotone_bad_cake, efm_few_chores_cake, efm_identical_except_one,
    efm_identical_rankings_chores_cake, CyclePolicy,
};
use fairdiv_core::{
    Allocation, EnvyGraph, Error, FairnessCertificate, GraphVariant, MixedAllocation, Notion, RunTrace,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

mod schema;

use schema::{AllocationFile, CertificateFile, Instance, InstanceFile};

#[derive(Parser)]
#[command(name = "fairdiv", version, about = "Fair division of chores, doubly monotone items and cake")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an allocation algorithm and certify its output.
    Solve(SolveArgs),
    /// Print a random instance of a named family.
    Generate(GenerateArgs),
    /// Check an allocation against a fairness notion.
    Check(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    NaiveEce,
    Ttece,
    DoublyMonotone,
    RoundRobin,
    Cwma,
    EfmBadcake,
    EfmCakePhase,
    EfmIdentical,
    EfmIdenticalExceptOne,
    EfmFewChores,
    BruteEf,
    BruteEf1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StartAlgo {
    DoublyMonotone,
    RoundRobin,
    Ttece,
    Cwma,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    /// Seeded random choice among the cycles of the graph.
    Arbitrary,
    /// Abort when a cycle would have to be resolved.
    Refuse,
    /// First cycle found by depth-first search.
    Dfs,
}

#[derive(clap::Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the run trace as text.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the final envy graph in DOT format.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dfs")]
    cycle_policy: PolicyArg,
    /// Comma-separated item permutation, e.g. `2,0,1`.
    #[arg(long)]
    item_order: Option<String>,
    /// Comma-separated agent permutation for round-robin.
    #[arg(long)]
    agent_order: Option<String>,
    /// Maximum number of assignments the brute-force search may scan.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Items-only algorithm that seeds the cake phase.
    #[arg(long, value_enum, default_value = "doubly-monotone")]
    start: StartAlgo,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    items: Option<usize>,
    #[arg(long)]
    max_value: Option<i64>,
    #[arg(long)]
    segments: Option<usize>,
    /// Set splitting: universe size.
    #[arg(long)]
    universe: Option<usize>,
    /// Set splitting: number of family members.
    #[arg(long)]
    members: Option<usize>,
    /// Write to a file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CheckArgs {
    instance: PathBuf,
    allocation: PathBuf,
    #[arg(long, default_value = "ef1")]
    notion: String,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "error: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(&args),
        Command::Generate(args) => generate_cmd(&args),
        Command::Check(args) => check(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}

fn read_instance(path: &Path) -> CliResult<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    file.to_instance().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value")
}

fn parse_perm(text: &str, len: usize, what: &str) -> CliResult<Vec<usize>> {
    let perm = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|e| Failure::Input(format!("{what}: `{s}`: {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    if sorted != (0..len).collect::<Vec<_>>() {
        return Err(Failure::Input(format!("{what} must be a permutation of 0..{len}")));
    }
    Ok(perm)
}

/// Picks a uniformly random strongly connected component with a cycle, then
/// walks random successors inside it until a vertex repeats.
struct RandomCycle(ChaCha8Rng);

impl CycleChooser for RandomCycle {
    fn choose(&mut self, graph: &EnvyGraph) -> Option<Vec<usize>> {
        let cyclic: Vec<Vec<usize>> = component_toposort(graph).into_iter().filter(|c| c.len() > 1).collect();
        let component = cyclic.choose(&mut self.0)?;
        let mut walk = vec![component[self.0.gen_range(0..component.len())]];
        loop {
            let here = *walk.last().expect("non-empty walk");
            let next: Vec<usize> = graph.successors(here).filter(|k| component.contains(k)).collect();
            let step = *next.choose(&mut self.0)?;
            if let Some(at) = walk.iter().position(|&v| v == step) {
                return Some(walk.split_off(at));
            }
            walk.push(step);
        }
    }
}

fn chooser(policy: PolicyArg, seed: u64) -> CliResult<Box<dyn CycleChooser>> {
    match policy {
        PolicyArg::Dfs => Ok(Box::new(FirstCycle)),
        PolicyArg::Arbitrary => Ok(Box::new(RandomCycle(generate::rng(seed)))),
        PolicyArg::Refuse => Err(Failure::Input("--cycle-policy refuse applies to efm-cake-phase only".into())),
    }
}

#[derive(Serialize)]
struct SolveOutput {
    algorithm: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    claim: Option<String>,
    allocation: Option<AllocationFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateFile>,
}

enum Outcome {
    Items(Allocation, Option<RunTrace>),
    Mixed(MixedAllocation, RunTrace),
    NotFound(Notion),
}

fn solve(args: &SolveArgs) -> CliResult<u8> {
    let instance = read_instance(&args.instance)?;
    let algo_name = args.algo.to_possible_value().expect("named variant").get_name().to_string();
    let indivisible = || match &instance {
        Instance::Indivisible(i) => Ok(i),
        Instance::Mixed(_) => Err(Failure::Input(format!("{algo_name} takes an indivisible instance"))),
    };
    let mixed = || match &instance {
        Instance::Mixed(m) => Ok(m),
        Instance::Indivisible(_) => Err(Failure::Input(format!("{algo_name} takes a mixed instance"))),
    };
    let items = instance.indivisible();
    let item_order = match &args.item_order {
        Some(text) => parse_perm(text, items.items(), "item order")?,
        None => index_order(items.items()),
    };
    let agent_order = match &args.agent_order {
        Some(text) => parse_perm(text, items.agents(), "agent order")?,
        None => index_order(items.agents()),
    };
    if args.cycle_policy == PolicyArg::Refuse && args.algo != Algo::EfmCakePhase {
        return Err(Failure::Input("--cycle-policy refuse applies to efm-cake-phase only".into()));
    }

    let (outcome, claim) = match args.algo {
        Algo::NaiveEce => {
            let (a, t) = naive_envy_cycle_elimination(indivisible()?, &item_order, chooser(args.cycle_policy, args.seed)?.as_mut())?;
            (Outcome::Items(a, Some(t)), None)
        }
        Algo::Ttece => {
            let (a, t) = top_trading_envy_cycle_elimination(indivisible()?, &item_order)?;
            (Outcome::Items(a, Some(t)), Some(Notion::Ef1))
        }
        Algo::DoublyMonotone => {
            let (a, t) = doubly_monotone_ef1(indivisible()?, &item_order, chooser(args.cycle_policy, args.seed)?.as_mut())?;
            (Outcome::Items(a, Some(t)), Some(Notion::Ef1))
        }
        Algo::RoundRobin => {
            let inst = indivisible()?;
            let (a, t) = round_robin(inst, &agent_order)?;
            let uniform = inst.is_monotone_nonincreasing() || inst.is_monotone_nondecreasing();
            (Outcome::Items(a, Some(t)), uniform.then_some(Notion::Ef1))
        }
        Algo::Cwma => {
            let (a, t) = cwma(indivisible()?)?;
            (Outcome::Items(a, Some(t)), Some(Notion::Ef1))
        }
        Algo::EfmBadcake => {
            let (a, t) = efm_doubly_monotone_bad_cake(mixed()?)?;
            (Outcome::Mixed(a, t), Some(Notion::Efm))
        }
        Algo::EfmCakePhase => {
            let inst = mixed()?;
            let items = inst.indivisible();
            let (start, _) = match args.start {
                StartAlgo::DoublyMonotone => {
                    doubly_monotone_ef1(items, &item_order, chooser(PolicyArg::Dfs, args.seed)?.as_mut())?
                }
                StartAlgo::RoundRobin => round_robin(items, &agent_order)?,
                StartAlgo::Ttece => top_trading_envy_cycle_elimination(items, &item_order)?,
                StartAlgo::Cwma => cwma(items)?,
            };
            let policy = match args.cycle_policy {
                PolicyArg::Refuse => CyclePolicy::RefuseAll,
                PolicyArg::Arbitrary | PolicyArg::Dfs => CyclePolicy::ArbitraryCycle,
            };
            let (a, t) = efm_cake_phase(inst, &start, policy)?;
            let claim = (policy == CyclePolicy::ArbitraryCycle && items.is_monotone_nondecreasing()).then_some(Notion::Efm);
            (Outcome::Mixed(a, t), claim)
        }
        Algo::EfmIdentical => {
            let (a, t) = efm_identical_rankings_chores_cake(mixed()?)?;
            (Outcome::Mixed(a, t), Some(Notion::Efm))
        }
        Algo::EfmIdenticalExceptOne => {
            let (a, t) = efm_identical_except_one(mixed()?)?;
            (Outcome::Mixed(a, t), Some(Notion::Efm))
        }
        Algo::EfmFewChores => {
            let (a, t) = efm_few_chores_cake(mixed()?)?;
            (Outcome::Mixed(a, t), Some(Notion::Efm))
        }
        Algo::BruteEf | Algo::BruteEf1 => {
            let notion = if args.algo == Algo::BruteEf { Notion::Ef } else { Notion::Ef1 };
            match brute_force_fair_search(indivisible()?, notion, args.budget)? {
                Some(a) => (Outcome::Items(a, None), Some(notion)),
                None => (Outcome::NotFound(notion), None),
            }
        }
    };

    let (allocation, certificate, trace, graph) = match &outcome {
        Outcome::NotFound(notion) => {
            let output = SolveOutput {
                algorithm: algo_name,
                status: format!("no {} allocation", notion.name()),
                claim: None,
                allocation: None,
                certificate: None,
            };
            println!("{}", to_json(&output));
            return Ok(0);
        }
        Outcome::Items(a, trace) => {
            let inst = instance.indivisible();
            a.validate_for(inst)?;
            let cert = match claim {
                Some(Notion::Ef) => check_ef(inst, a),
                _ => check_ef1(inst, a),
            };
            let graph = EnvyGraph::of_allocation(inst, a, GraphVariant::Plain)?;
            (AllocationFile::from_items(a), cert, trace.as_ref(), graph)
        }
        Outcome::Mixed(a, trace) => {
            let inst = mixed()?;
            a.validate_for(inst)?;
            let cert = check_efm(inst, a);
            let graph = EnvyGraph::of_mixed(inst, a, GraphVariant::Plain)?;
            (AllocationFile::from_mixed(a), cert, Some(trace), graph)
        }
    };
    if let (Some(path), Some(trace)) = (&args.trace, trace) {
        write_file(path, &trace.to_string())?;
    }
    if let Some(path) = &args.dot {
        write_file(path, &graph.to_dot())?;
    }
    let violated = claim.is_some() && !certificate.holds();
    let output = SolveOutput {
        algorithm: algo_name.clone(),
        status: if violated { "claim violated".into() } else { "ok".into() },
        claim: claim.map(|n| n.name().to_string()),
        allocation: Some(allocation),
        certificate: Some(CertificateFile::new(&certificate)),
    };
    println!("{}", to_json(&output));
    if violated {
        return Err(Failure::Internal(format!(
            "{algo_name} output fails its {} claim",
            certificate.notion.name()
        )));
    }
    Ok(0)
}

fn generate_cmd(args: &GenerateArgs) -> CliResult<u8> {
    let family = Family::from_name(&args.family).ok_or_else(|| {
        let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        Failure::Input(format!("unknown family `{}` (expected one of {})", args.family, names.join(", ")))
    })?;
    let defaults = FamilyParams::default();
    let params = FamilyParams {
        agents: args.agents.unwrap_or(defaults.agents),
        items: args.items.unwrap_or(defaults.items),
        max_value: args.max_value.unwrap_or(defaults.max_value),
        segments: args.segments.unwrap_or(defaults.segments),
        universe: args.universe.unwrap_or(defaults.universe),
        members: args.members.unwrap_or(defaults.members),
    };
    if params.agents == 0 {
        return Err(Failure::Input("at least one agent is required".into()));
    }
    let instance = match generate::generate(family, args.seed, &params)? {
        Generated::Indivisible(i) => Instance::Indivisible(i),
        Generated::Mixed(m) => Instance::Mixed(m),
    };
    let text = to_json(&InstanceFile::from_instance(&instance));
    match &args.output {
        Some(path) => write_file(path, &format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(0)
}

fn require_complete(alloc: &Allocation, items: usize) -> CliResult<()> {
    match (0..items).find(|&j| alloc.owner(j).is_none()) {
        Some(j) => Err(Failure::Input(format!("item {j} is not assigned"))),
        None => Ok(()),
    }
}

fn check(args: &CheckArgs) -> CliResult<u8> {
    let instance = read_instance(&args.instance)?;
    let notion = schema::parse_notion(&args.notion)
        .ok_or_else(|| Failure::Input(format!("unknown notion `{}` (expected ef, ef1 or efm)", args.notion)))?;
    let text = fs::read_to_string(&args.allocation)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.allocation.display())))?;
    let file: AllocationFile =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", args.allocation.display())))?;
    let certificate: FairnessCertificate = match &instance {
        Instance::Indivisible(inst) => {
            if file.cake.as_ref().is_some_and(|c| c.iter().any(|p| !p.is_empty())) {
                return Err(Failure::Input("indivisible instances take no cake".into()));
            }
            let alloc = file.to_items().map_err(Failure::Input)?;
            alloc.validate_for(inst).map_err(|e| Failure::Input(e.to_string()))?;
            require_complete(&alloc, inst.items())?;
            match notion {
                Notion::Ef => check_ef(inst, &alloc),
                Notion::Ef1 => check_ef1(inst, &alloc),
                Notion::Efm => {
                    let alloc = MixedAllocation::from_items(alloc);
                    let inst = fairdiv_core::MixedInstance::new(
                        inst.clone(),
                        vec![fairdiv_core::PiecewiseConstantDensity::uniform(fairdiv_core::rational::zero()); inst.agents()],
                        fairdiv_core::DivisibleKind::Cake,
                    )?;
                    check_efm(&inst, &alloc)
                }
            }
        }
        Instance::Mixed(inst) => {
            let alloc = file.to_mixed().map_err(Failure::Input)?;
            alloc.validate_for(inst).map_err(|e| Failure::Input(e.to_string()))?;
            require_complete(alloc.items(), inst.indivisible().items())?;
            match notion {
                Notion::Ef => check_ef_mixed(inst, &alloc),
                Notion::Ef1 => return Err(Failure::Input("EF1 is defined for indivisible instances; use efm".into())),
                Notion::Efm => check_efm(inst, &alloc),
            }
        }
    };
    println!("{}", to_json(&CertificateFile::new(&certificate)));
    Ok(if certificate.holds() { 0 } else { 3 })
}
