//! viewgate: serve and administer a view-layer gateway over RDF graphs.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use viewgate_core::gateway::{
    base_prefixes, expand_prefixed_names, serve, AdminPayload, Config, Gateway, QueryRequest,
    RequestStatus, TxFilter, DEFAULT_LISTEN,
};
use viewgate_core::ledger::Privilege;
use viewgate_core::query::{serialize_results, ResultFormat};
use viewgate_core::rdf::{canonical_serialize, parse_ntriples, Graph};

#[derive(Parser)]
#[command(name = "viewgate", version, about = "Secure view-layer gateway over RDF data")]
struct Cli {
    /// Gateway config file.
    #[arg(long, global = true, env = "VIEWGATE_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP gateway.
    Serve {
        /// host:port to listen on.
        #[arg(long, env = "VIEWGATE_LISTEN", default_value = DEFAULT_LISTEN)]
        listen: String,
    },
    /// Validate an N-Triples file and install it as a configured graph's
    /// canonical content.
    Load {
        /// Graph id (must be present in the config's graphs map).
        #[arg(long)]
        graph: String,
        /// N-Triples input (prefixed names allowed).
        file: PathBuf,
    },
    /// Validate view definitions and append them to the views catalog file.
    Defview {
        /// View definition records (VIEW/FROM/TEMPLATE/WHERE/END).
        file: PathBuf,
    },
    /// Run a query as a user; the decision is recorded on the ledger.
    Query {
        #[arg(long)]
        user: String,
        #[arg(long)]
        token: String,
        /// File holding the query text.
        file: PathBuf,
        /// Restrict to specific views (repeatable); never widens access.
        #[arg(long = "view")]
        views: Vec<String>,
        /// csv or sparql-json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Grant a role to a user, or a privilege to a role.
    Grant(AdminArgs),
    /// Revoke a role from a user, or a privilege from a role.
    Revoke(AdminArgs),
    /// Inspect the ledger (super-users only).
    Audit {
        #[command(subcommand)]
        action: AuditAction,
    },
    /// Ontology consistency report over a source graph.
    Lint {
        #[arg(long)]
        graph: String,
        /// Emit machine-readable lines instead of the table.
        #[arg(long)]
        machine: bool,
    },
}

#[derive(Args)]
struct AdminArgs {
    /// Acting principal.
    #[arg(long)]
    actor: String,
    #[arg(long)]
    token: String,
    #[command(subcommand)]
    target: AdminTarget,
}

#[derive(Subcommand)]
enum AdminTarget {
    /// Role membership: --user gets/loses --role.
    Role {
        #[arg(long)]
        user: String,
        #[arg(long)]
        role: String,
    },
    /// Role privilege: --role gets/loses (--action, --resource).
    Privilege {
        #[arg(long)]
        role: String,
        /// read | write | delegate
        #[arg(long)]
        action: String,
        /// view id (read), graph id (write), or role (delegate)
        #[arg(long)]
        resource: String,
    },
}

#[derive(Subcommand)]
enum AuditAction {
    /// Re-verify the whole chain.
    Verify {
        #[arg(long)]
        user: String,
        #[arg(long)]
        token: String,
    },
    /// List transaction summaries.
    List {
        #[arg(long)]
        user: String,
        #[arg(long)]
        token: String,
        /// Filter by actor or payload user.
        #[arg(long = "filter-user")]
        filter_user: Option<String>,
        /// Filter by kind (e.g. ACCESS_RECORD).
        #[arg(long)]
        kind: Option<String>,
        /// Height range, inclusive.
        #[arg(long)]
        from: Option<u64>,
        #[arg(long)]
        to: Option<u64>,
    },
    /// Dump the canonical chain JSON.
    Export {
        #[arg(long)]
        user: String,
        #[arg(long)]
        token: String,
    },
}

fn load_config(config: &Option<PathBuf>) -> Result<Config> {
    let path = config
        .as_ref()
        .ok_or_else(|| anyhow!("no config: pass --config or set VIEWGATE_CONFIG"))?;
    Ok(Config::load(path)?)
}

fn open_gateway(config: &Option<PathBuf>) -> Result<Gateway> {
    Ok(Gateway::open(load_config(config)?)?)
}

fn privilege_of(action: &str, resource: String) -> Result<Privilege> {
    Ok(match action.to_ascii_lowercase().as_str() {
        "read" => Privilege::read(resource),
        "write" => Privilege::write(resource),
        "delegate" => Privilege::delegate(resource),
        other => bail!("unknown action {other:?}: expected read, write, or delegate"),
    })
}

fn admin_payload(target: AdminTarget) -> Result<AdminPayload> {
    Ok(match target {
        AdminTarget::Role { user, role } => AdminPayload::Role { user, role },
        AdminTarget::Privilege {
            role,
            action,
            resource,
        } => AdminPayload::Privilege {
            role,
            privilege: privilege_of(&action, resource)?,
        },
    })
}

fn run(config: Option<PathBuf>, command: Command) -> Result<i32> {
    match command {
        Command::Serve { ref listen } => {
            let gateway = open_gateway(&config)?;
            let handle = serve(Arc::new(Mutex::new(gateway)), listen)?;
            println!("viewgate listening on {}", handle.addr());
            loop {
                std::thread::park();
            }
        }
        Command::Load { ref graph, ref file } => {
            let config = load_config(&config)?;
            let Some(target) = config.graphs.get(graph) else {
                bail!("graph {graph:?} is not declared in the config");
            };
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            let prefixes = base_prefixes(&config.default_namespace);
            let expanded = expand_prefixed_names(&text, &prefixes)?;
            let triples = parse_ntriples(&expanded)?;
            let mut g = Graph::new(graph.clone());
            for t in triples {
                g.insert(t);
            }
            if let Some(dir) = target.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(target, canonical_serialize(&g))
                .with_context(|| format!("writing {}", target.display()))?;
            println!(
                "loaded {} triples into graph {graph} ({})",
                g.len(),
                target.display()
            );
            Ok(0)
        }
        Command::Defview { ref file } => {
            let gateway = open_gateway(&config)?;
            let config = load_config(&config)?;
            let Some(views_path) = config.views_path else {
                bail!("the config declares no views catalog file");
            };
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            let ids = gateway.dry_run_view_definitions(&text)?;
            let mut catalog = if views_path.exists() {
                std::fs::read_to_string(&views_path)?
            } else {
                String::new()
            };
            if !catalog.is_empty() && !catalog.ends_with('\n') {
                catalog.push('\n');
            }
            catalog.push_str(&text);
            if !catalog.ends_with('\n') {
                catalog.push('\n');
            }
            std::fs::write(&views_path, catalog)?;
            println!("defined {} view(s): {}", ids.len(), ids.join(", "));
            Ok(0)
        }
        Command::Query {
            ref user,
            ref token,
            ref file,
            ref views,
            ref format,
        } => {
            let format: ResultFormat = format.parse()?;
            let mut gateway = open_gateway(&config)?;
            let query = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            let response = gateway.handle_query(&QueryRequest {
                user: user.clone(),
                token: token.clone(),
                query,
                view_ids: if views.is_empty() {
                    None
                } else {
                    Some(views.clone())
                },
            })?;
            gateway.flush()?;
            eprintln!(
                "views: [{}], recorded tx {}",
                response.view_ids.join(", "),
                response.tx_id
            );
            match response.status {
                RequestStatus::Ok => {
                    print!("{}", serialize_results(&response.results, format));
                    Ok(0)
                }
                RequestStatus::Denied => {
                    eprintln!(
                        "denied: {}",
                        response.deny_reason.unwrap_or_else(|| "no reason".into())
                    );
                    Ok(3)
                }
            }
        }
        Command::Grant(args) => {
            let mut gateway = open_gateway(&config)?;
            let tx_id =
                gateway.admin_grant(&args.actor, &args.token, admin_payload(args.target)?)?;
            println!("{tx_id}");
            Ok(0)
        }
        Command::Revoke(args) => {
            let mut gateway = open_gateway(&config)?;
            let tx_id =
                gateway.admin_revoke(&args.actor, &args.token, admin_payload(args.target)?)?;
            println!("{tx_id}");
            Ok(0)
        }
        Command::Audit { action } => {
            let mut gateway = open_gateway(&config)?;
            match action {
                AuditAction::Verify { user, token } => {
                    let report = gateway.audit_verify(&user, &token)?;
                    if report.ok {
                        println!("ok: {} blocks verified", report.blocks);
                        Ok(0)
                    } else {
                        println!(
                            "FAILED at block {}: {}",
                            report.failure_height.unwrap_or_default(),
                            report.failure_reason.unwrap_or_default()
                        );
                        Ok(2)
                    }
                }
                AuditAction::List {
                    user,
                    token,
                    filter_user,
                    kind,
                    from,
                    to,
                } => {
                    let txs = gateway.audit_list(
                        &user,
                        &token,
                        &TxFilter {
                            user: filter_user,
                            kind,
                            from_height: from,
                            to_height: to,
                        },
                    )?;
                    for t in &txs {
                        println!(
                            "{}\t{}\t{}\t{}\t{}\t{}",
                            t.height,
                            t.kind,
                            t.actor,
                            t.user.as_deref().unwrap_or("-"),
                            t.timestamp,
                            t.tx_id
                        );
                    }
                    eprintln!("{} transaction(s)", txs.len());
                    Ok(0)
                }
                AuditAction::Export { user, token } => {
                    println!("{}", gateway.audit_export(&user, &token)?);
                    Ok(0)
                }
            }
        }
        Command::Lint { ref graph, machine } => {
            let gateway = open_gateway(&config)?;
            let report = gateway.lint_graph(graph)?;
            if machine {
                print!("{}", report.to_machine_lines());
            } else {
                print!("{}", report.to_table());
            }
            Ok(if report.error_count() == 0 { 0 } else { 2 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli.config, cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
