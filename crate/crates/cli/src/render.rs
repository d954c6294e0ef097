//! DOT output. Edges kept by the initial configuration only are solid, those
//! of the final configuration only are dashed, and shared ones are doubled.

use std::fmt::Write;

use clap::ValueEnum;
use netupdate_core::netmodel::{Configuration, EdgeLabel, NetworkInstance, NodeId};
use netupdate_core::WaitedPlan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Initial,
    Final,
    Union,
    /// The configuration after a given round of a plan.
    PlanStep,
}

fn quote(id: &NodeId) -> String {
    format!("\"{}\"", id.as_str().replace('\\', "\\\\").replace('"', "\\\""))
}

fn edge_attrs(label: EdgeLabel) -> &'static str {
    match label {
        EdgeLabel::InitialOnly => "",
        EdgeLabel::FinalOnly => " [style=dashed]",
        EdgeLabel::Both => " [color=\"black:black\"]",
    }
}

/// Node state in a plan-step rendering.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Shade {
    Plain,
    Done,
    Current,
}

pub fn dot(net: &NetworkInstance, target: Target, plan: Option<&WaitedPlan>, step: usize) -> Result<String, String> {
    let mut shade = vec![Shade::Plain; net.node_count()];
    let (config, caption): (Configuration, String) = match target {
        Target::Initial => (net.initial(), "initial".into()),
        Target::Final => (net.final_config(), "final".into()),
        Target::Union => (net.union(), "initial and final".into()),
        Target::PlanStep => {
            let plan = plan.ok_or("plan-step rendering needs a plan")?;
            if step == 0 || step > plan.rounds.len() {
                return Err(format!(
                    "step {step} is outside the plan's {} rounds",
                    plan.rounds.len()
                ));
            }
            let mut config = net.initial();
            for (i, round) in plan.rounds[..step].iter().enumerate() {
                for id in round {
                    let u = net
                        .node_index(id)
                        .ok_or_else(|| format!("plan names unknown node `{id}`"))?;
                    if shade[u] != Shade::Plain {
                        return Err(format!("plan updates `{id}` twice"));
                    }
                    net.apply_update(&mut config, u);
                    shade[u] = if i + 1 == step { Shade::Current } else { Shade::Done };
                }
            }
            (config, format!("after round {step} of {}", plan.rounds.len()))
        }
    };

    let master = net.synthetic_source();
    let sources: Vec<usize> = match master {
        Some(m) => net.out_links(m).iter().map(|&e| net.link(e).to).collect(),
        None => vec![net.source()],
    };

    let mut out = String::new();
    writeln!(out, "digraph update {{").unwrap();
    writeln!(out, "  label=\"{caption}\";").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for u in (0..net.node_count()).filter(|&u| Some(u) != master) {
        let mut attrs = Vec::new();
        if sources.contains(&u) {
            attrs.push("shape=box");
        }
        match shade[u] {
            Shade::Plain => {}
            Shade::Done => attrs.push("style=filled, fillcolor=lightgray"),
            Shade::Current => attrs.push("style=\"filled,bold\", fillcolor=gold"),
        }
        if attrs.is_empty() {
            writeln!(out, "  {};", quote(net.node_id(u))).unwrap();
        } else {
            writeln!(out, "  {} [{}];", quote(net.node_id(u)), attrs.join(", ")).unwrap();
        }
    }
    for e in config.iter() {
        let l = net.link(e);
        if Some(l.from) == master {
            continue;
        }
        writeln!(
            out,
            "  {} -> {}{};",
            quote(net.node_id(l.from)),
            quote(net.node_id(l.to)),
            edge_attrs(l.label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}
