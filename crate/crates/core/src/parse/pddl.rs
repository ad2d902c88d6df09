//! FOND-PDDL subset: `:strips :typing :non-deterministic`, positive
//! preconditions and goals, `oneof` only at the top level of an effect.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::sexpr::{self, Loc, Sexpr};
use super::ParseError;
use crate::task::{Action, ActionId, Effect, Fact, FactSet, FondTask, State, TaskKind};

pub const DEFAULT_GROUNDING_CAP: usize = 100_000;

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing", ":non-deterministic"];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Term {
    Var(usize),
    Const(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct AtomTemplate {
    pred: usize,
    args: Vec<Term>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct EffectTemplate {
    add: Vec<AtomTemplate>,
    del: Vec<AtomTemplate>,
}

/// A lifted action schema; its index in the domain becomes the grounded
/// actions' partition id.
#[derive(Clone, Debug)]
pub struct LiftedSchema {
    pub name: String,
    pub params: Vec<(String, String)>,
    pre: Vec<AtomTemplate>,
    effects: Vec<EffectTemplate>,
}

#[derive(Debug)]
struct Predicate {
    name: String,
    arg_types: Vec<String>,
}

#[derive(Debug, Default)]
struct Domain {
    types: HashMap<String, String>,
    constants: Vec<(String, String)>,
    predicates: Vec<Predicate>,
    schemas: Vec<LiftedSchema>,
}

impl Domain {
    fn predicate(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    fn is_subtype(&self, ty: &str, of: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.types.len() + 1 {
            if cur == of {
                return true;
            }
            match self.types.get(cur) {
                Some(parent) => cur = parent,
                None => return of == "object",
            }
        }
        false
    }
}

struct Problem {
    objects: Vec<(String, String)>,
    init: Vec<(usize, Vec<String>)>,
    goal: Vec<(usize, Vec<String>)>,
}

pub fn parse_pddl(domain_text: &str, problem_text: &str) -> Result<FondTask, ParseError> {
    parse_pddl_with_cap(domain_text, problem_text, DEFAULT_GROUNDING_CAP)
}

pub fn parse_pddl_with_cap(domain_text: &str, problem_text: &str, cap: usize) -> Result<FondTask, ParseError> {
    let domain = parse_domain(&sexpr::read(domain_text)?)?;
    let problem = parse_problem(&sexpr::read(problem_text)?, &domain)?;
    ground(&domain, &problem, cap)
}

fn expect_list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], ParseError> {
    e.as_list()
        .ok_or_else(|| ParseError::syntax(e.loc(), format!("expected {what}")))
}

fn expect_atom<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, ParseError> {
    e.as_atom()
        .ok_or_else(|| ParseError::syntax(e.loc(), format!("expected {what}")))
}

/// `a b - t c` → [(a, t), (b, t), (c, object)]
fn typed_list(items: &[Sexpr]) -> Result<Vec<(String, String)>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        match item {
            Sexpr::Atom(s, loc) if s == "-" => {
                let ty = items
                    .get(i + 1)
                    .ok_or_else(|| ParseError::syntax(*loc, "missing type after '-'"))?;
                if ty.head() == Some("either") {
                    return Err(ParseError::UnsupportedFeature("either types".into()));
                }
                let ty = expect_atom(ty, "type name")?;
                if pending.is_empty() {
                    return Err(ParseError::syntax(*loc, "type annotation without names"));
                }
                out.extend(pending.drain(..).map(|n| (n, ty.to_string())));
                i += 2;
            }
            Sexpr::Atom(s, _) => {
                pending.push(s.clone());
                i += 1;
            }
            Sexpr::List(_, loc) => return Err(ParseError::syntax(*loc, "expected a name")),
        }
    }
    out.extend(pending.into_iter().map(|n| (n, "object".to_string())));
    Ok(out)
}

fn check_define<'a>(e: &'a Sexpr, kind: &str) -> Result<&'a [Sexpr], ParseError> {
    let items = expect_list(e, "(define ...)")?;
    if items.first().and_then(Sexpr::as_atom) != Some("define") {
        return Err(ParseError::syntax(e.loc(), "expected (define ...)"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(e.loc(), format!("missing ({kind} name)")))?;
    let h = expect_list(header, "header")?;
    if h.len() != 2 || h[0].as_atom() != Some(kind) || h[1].as_atom().is_none() {
        return Err(ParseError::syntax(header.loc(), format!("expected ({kind} name)")));
    }
    Ok(&items[2..])
}

fn check_requirements(items: &[Sexpr]) -> Result<(), ParseError> {
    for r in items {
        let r = expect_atom(r, "requirement")?;
        if !SUPPORTED_REQUIREMENTS.contains(&r) {
            return Err(ParseError::UnsupportedFeature(format!("requirement {r}")));
        }
    }
    Ok(())
}

fn parse_domain(e: &Sexpr) -> Result<Domain, ParseError> {
    let mut d = Domain::default();
    for section in check_define(e, "domain")? {
        let items = expect_list(section, "domain section")?;
        let key = items
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| ParseError::syntax(section.loc(), "empty section"))?;
        match key {
            ":requirements" => check_requirements(&items[1..])?,
            ":types" => {
                for (name, parent) in typed_list(&items[1..])? {
                    if name != "object" {
                        d.types.insert(name, parent);
                    }
                }
            }
            ":constants" => d.constants.extend(typed_list(&items[1..])?),
            ":predicates" => {
                for p in &items[1..] {
                    let parts = expect_list(p, "predicate declaration")?;
                    let name = parts
                        .first()
                        .and_then(Sexpr::as_atom)
                        .ok_or_else(|| ParseError::syntax(p.loc(), "predicate name"))?;
                    if d.predicate(name).is_some() {
                        return Err(ParseError::syntax(p.loc(), format!("duplicate predicate {name}")));
                    }
                    let args = typed_list(&parts[1..])?;
                    d.predicates.push(Predicate {
                        name: name.to_string(),
                        arg_types: args.into_iter().map(|(_, t)| t).collect(),
                    });
                }
            }
            ":action" => {
                let schema = parse_schema(items, section.loc(), &d)?;
                d.schemas.push(schema);
            }
            other => return Err(ParseError::UnsupportedFeature(format!("domain section {other}"))),
        }
    }
    Ok(d)
}

fn parse_schema(items: &[Sexpr], loc: Loc, d: &Domain) -> Result<LiftedSchema, ParseError> {
    let name = items
        .get(1)
        .and_then(Sexpr::as_atom)
        .ok_or_else(|| ParseError::syntax(loc, "action name"))?
        .to_string();
    let mut params = Vec::new();
    let mut pre_expr = None;
    let mut eff_expr = None;
    let mut i = 2;
    while i < items.len() {
        let key = expect_atom(&items[i], "action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| ParseError::syntax(items[i].loc(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => params = typed_list(expect_list(value, "parameter list")?)?,
            ":precondition" => pre_expr = Some(value),
            ":effect" => eff_expr = Some(value),
            other => {
                return Err(ParseError::syntax(
                    items[i].loc(),
                    format!("unknown action keyword {other}"),
                ))
            }
        }
        i += 2;
    }
    for (p, _) in &params {
        if !p.starts_with('?') {
            return Err(ParseError::syntax(loc, format!("parameter {p} must start with '?'")));
        }
    }
    let ctx = SchemaCtx {
        domain: d,
        params: &params,
    };
    let pre = match pre_expr {
        Some(e) => ctx.conjunction(e)?,
        None => Vec::new(),
    };
    let effects = match eff_expr {
        Some(e) => ctx.effects(e)?,
        None => vec![EffectTemplate::default()],
    };
    Ok(LiftedSchema {
        name,
        params,
        pre,
        effects,
    })
}

struct SchemaCtx<'a> {
    domain: &'a Domain,
    params: &'a [(String, String)],
}

impl SchemaCtx<'_> {
    fn atom(&self, e: &Sexpr) -> Result<AtomTemplate, ParseError> {
        let parts = expect_list(e, "atom")?;
        let name = parts
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| ParseError::syntax(e.loc(), "predicate name"))?;
        match name {
            "not" | "or" | "imply" | "exists" | "forall" | "when" | "=" | "increase" | "decrease" => {
                return Err(ParseError::UnsupportedFeature(format!("`{name}` at {}", e.loc())))
            }
            _ => {}
        }
        let pred = self
            .domain
            .predicate(name)
            .ok_or_else(|| ParseError::syntax(e.loc(), format!("undeclared predicate {name}")))?;
        let arity = self.domain.predicates[pred].arg_types.len();
        if parts.len() - 1 != arity {
            return Err(ParseError::syntax(
                e.loc(),
                format!("predicate {name} expects {arity} arguments"),
            ));
        }
        let mut args = Vec::new();
        for a in &parts[1..] {
            let a = expect_atom(a, "term")?;
            if a.starts_with('?') {
                let idx = self
                    .params
                    .iter()
                    .position(|(p, _)| p == a)
                    .ok_or_else(|| ParseError::syntax(e.loc(), format!("unbound variable {a}")))?;
                args.push(Term::Var(idx));
            } else {
                if !self.domain.constants.iter().any(|(c, _)| c == a) {
                    return Err(ParseError::syntax(e.loc(), format!("undeclared constant {a}")));
                }
                args.push(Term::Const(a.to_string()));
            }
        }
        Ok(AtomTemplate { pred, args })
    }

    fn conjunction(&self, e: &Sexpr) -> Result<Vec<AtomTemplate>, ParseError> {
        match e {
            Sexpr::List(items, _) if items.is_empty() => Ok(Vec::new()),
            Sexpr::List(items, _) if e.head() == Some("and") => {
                let mut out = Vec::new();
                for it in &items[1..] {
                    out.extend(self.conjunction(it)?);
                }
                Ok(out)
            }
            _ => Ok(vec![self.atom(e)?]),
        }
    }

    fn literals(&self, e: &Sexpr, into: &mut EffectTemplate) -> Result<(), ParseError> {
        match e.head() {
            None if e.as_list().is_some_and(|l| l.is_empty()) => Ok(()),
            Some("and") => {
                for it in &e.as_list().unwrap()[1..] {
                    self.literals(it, into)?;
                }
                Ok(())
            }
            Some("not") => {
                let inner = e.as_list().unwrap();
                if inner.len() != 2 {
                    return Err(ParseError::syntax(e.loc(), "(not ...) takes one atom"));
                }
                into.del.push(self.atom(&inner[1])?);
                Ok(())
            }
            Some("oneof") => Err(ParseError::UnsupportedFeature(format!("nested oneof at {}", e.loc()))),
            _ => {
                into.add.push(self.atom(e)?);
                Ok(())
            }
        }
    }

    fn effects(&self, e: &Sexpr) -> Result<Vec<EffectTemplate>, ParseError> {
        let mut common = EffectTemplate::default();
        let mut oneof: Option<&Sexpr> = None;
        let top: Vec<&Sexpr> = if e.head() == Some("and") {
            e.as_list().unwrap()[1..].iter().collect()
        } else {
            vec![e]
        };
        for part in top {
            if part.head() == Some("oneof") {
                if oneof.is_some() {
                    return Err(ParseError::UnsupportedFeature(format!(
                        "multiple oneof in one effect at {}",
                        part.loc()
                    )));
                }
                oneof = Some(part);
            } else {
                self.literals(part, &mut common)?;
            }
        }
        let Some(oneof) = oneof else {
            return Ok(vec![common]);
        };
        let branches = &oneof.as_list().unwrap()[1..];
        if branches.is_empty() {
            return Err(ParseError::syntax(oneof.loc(), "oneof needs at least one branch"));
        }
        let mut out = Vec::new();
        for b in branches {
            let mut eff = common.clone();
            self.literals(b, &mut eff)?;
            out.push(eff);
        }
        Ok(out)
    }
}

fn ground_atom_list(
    items: &[Sexpr],
    domain: &Domain,
    objects: &[(String, String)],
) -> Result<Vec<(usize, Vec<String>)>, ParseError> {
    let mut out = Vec::new();
    for it in items {
        let parts = expect_list(it, "ground atom")?;
        let name = parts
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| ParseError::syntax(it.loc(), "predicate name"))?;
        if matches!(name, "not" | "or" | "imply" | "exists" | "forall" | "=") {
            return Err(ParseError::UnsupportedFeature(format!("`{name}` at {}", it.loc())));
        }
        let pred = domain
            .predicate(name)
            .ok_or_else(|| ParseError::syntax(it.loc(), format!("undeclared predicate {name}")))?;
        let mut args = Vec::new();
        for a in &parts[1..] {
            let a = expect_atom(a, "object")?;
            if !objects.iter().any(|(o, _)| o == a) {
                return Err(ParseError::syntax(it.loc(), format!("undeclared object {a}")));
            }
            args.push(a.to_string());
        }
        if args.len() != domain.predicates[pred].arg_types.len() {
            return Err(ParseError::syntax(it.loc(), format!("wrong arity for {name}")));
        }
        out.push((pred, args));
    }
    Ok(out)
}

fn parse_problem(e: &Sexpr, domain: &Domain) -> Result<Problem, ParseError> {
    let mut objects: Vec<(String, String)> = domain.constants.clone();
    let mut init_expr = None;
    let mut goal_expr = None;
    for section in check_define(e, "problem")? {
        let items = expect_list(section, "problem section")?;
        let key = items
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| ParseError::syntax(section.loc(), "empty section"))?;
        match key {
            ":domain" => {}
            ":requirements" => check_requirements(&items[1..])?,
            ":objects" => {
                for (o, t) in typed_list(&items[1..])? {
                    if !objects.iter().any(|(x, _)| *x == o) {
                        objects.push((o, t));
                    }
                }
            }
            ":init" => init_expr = Some(&items[1..]),
            ":goal" => {
                let g = items
                    .get(1)
                    .ok_or_else(|| ParseError::syntax(section.loc(), "empty goal"))?;
                goal_expr = Some(g);
            }
            other => return Err(ParseError::UnsupportedFeature(format!("problem section {other}"))),
        }
    }
    for (o, t) in &objects {
        if t != "object" && !domain.types.contains_key(t) {
            return Err(ParseError::syntax(
                e.loc(),
                format!("object {o} has undeclared type {t}"),
            ));
        }
    }
    let init = ground_atom_list(init_expr.unwrap_or(&[]), domain, &objects)?;
    let goal = match goal_expr {
        None => Vec::new(),
        Some(g) if g.head() == Some("and") => ground_atom_list(&g.as_list().unwrap()[1..], domain, &objects)?,
        Some(g) if g.as_list().is_some_and(|l| l.is_empty()) => Vec::new(),
        Some(g) => ground_atom_list(std::slice::from_ref(g), domain, &objects)?,
    };
    Ok(Problem { objects, init, goal })
}

type GroundAtom = (usize, Vec<usize>);

fn ground(domain: &Domain, problem: &Problem, cap: usize) -> Result<FondTask, ParseError> {
    let obj_index: HashMap<&str, usize> = problem
        .objects
        .iter()
        .enumerate()
        .map(|(i, (o, _))| (o.as_str(), i))
        .collect();
    let to_ground =
        |(p, args): &(usize, Vec<String>)| -> GroundAtom { (*p, args.iter().map(|a| obj_index[a.as_str()]).collect()) };

    let mut fluent = vec![false; domain.predicates.len()];
    for s in &domain.schemas {
        for e in &s.effects {
            for a in e.add.iter().chain(e.del.iter()) {
                fluent[a.pred] = true;
            }
        }
    }

    let init: BTreeSet<GroundAtom> = problem.init.iter().map(to_ground).collect();
    let static_true: HashSet<&GroundAtom> = init.iter().filter(|(p, _)| !fluent[*p]).collect();

    let mut universe: BTreeSet<GroundAtom> = init.iter().filter(|(p, _)| fluent[*p]).cloned().collect();
    let mut goal: Vec<GroundAtom> = Vec::new();
    for g in problem.goal.iter().map(to_ground) {
        // Static goal atoms that already hold are dropped; ones that do not
        // hold stay as never-true facts so the task stays unsolvable.
        if fluent[g.0] || !static_true.contains(&g) {
            universe.insert(g.clone());
            goal.push(g);
        }
    }

    struct Grounded {
        name: String,
        schema: usize,
        pre: Vec<GroundAtom>,
        effects: Vec<(Vec<GroundAtom>, Vec<GroundAtom>)>,
    }
    let mut grounded: Vec<Grounded> = Vec::new();

    for (si, schema) in domain.schemas.iter().enumerate() {
        let candidates: Vec<Vec<usize>> = schema
            .params
            .iter()
            .map(|(_, ty)| {
                problem
                    .objects
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, ot))| domain.is_subtype(ot, ty))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let bind = |t: &AtomTemplate, binding: &[usize]| -> GroundAtom {
            let args = t
                .args
                .iter()
                .map(|a| match a {
                    Term::Var(i) => binding[*i],
                    Term::Const(c) => obj_index[c.as_str()],
                })
                .collect();
            (t.pred, args)
        };
        // Static preconditions are checked as soon as their last variable is bound.
        let mut static_at: Vec<Vec<&AtomTemplate>> = vec![Vec::new(); schema.params.len() + 1];
        for p in schema.pre.iter().filter(|p| !fluent[p.pred]) {
            let last = p
                .args
                .iter()
                .filter_map(|a| match a {
                    Term::Var(i) => Some(*i + 1),
                    Term::Const(_) => None,
                })
                .max()
                .unwrap_or(0);
            static_at[last].push(p);
        }

        let mut binding = Vec::with_capacity(schema.params.len());
        let mut stack_ok = |binding: &[usize]| -> bool {
            static_at[binding.len()]
                .iter()
                .all(|t| static_true.contains(&bind(t, binding)))
        };
        if !stack_ok(&binding) {
            continue;
        }
        let mut results: Vec<Vec<usize>> = Vec::new();
        enumerate(
            &candidates,
            &mut binding,
            &mut stack_ok,
            &mut results,
            cap,
            grounded.len(),
        )?;
        for b in results {
            let pre: Vec<GroundAtom> = schema
                .pre
                .iter()
                .filter(|p| fluent[p.pred])
                .map(|p| bind(p, &b))
                .collect();
            let effects = schema
                .effects
                .iter()
                .map(|e| {
                    (
                        e.del.iter().map(|t| bind(t, &b)).collect::<Vec<_>>(),
                        e.add.iter().map(|t| bind(t, &b)).collect::<Vec<_>>(),
                    )
                })
                .collect::<Vec<_>>();
            let name = if b.is_empty() {
                schema.name.clone()
            } else {
                let args: Vec<&str> = b.iter().map(|&o| problem.objects[o].0.as_str()).collect();
                format!("{}({})", schema.name, args.join(","))
            };
            grounded.push(Grounded {
                name,
                schema: si,
                pre,
                effects,
            });
            if grounded.len() > cap {
                return Err(ParseError::GroundingExplosion { cap });
            }
        }
    }

    for g in &grounded {
        universe.extend(g.pre.iter().cloned());
        for (del, add) in &g.effects {
            universe.extend(del.iter().cloned());
            universe.extend(add.iter().cloned());
        }
    }
    let fact_ids: BTreeMap<GroundAtom, usize> = universe.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let width = fact_ids.len();
    let facts: Vec<Fact> = universe
        .iter()
        .enumerate()
        .map(|(i, (p, args))| {
            let pname = &domain.predicates[*p].name;
            let name = if args.is_empty() {
                pname.clone()
            } else {
                let a: Vec<&str> = args.iter().map(|&o| problem.objects[o].0.as_str()).collect();
                format!("{pname}({})", a.join(","))
            };
            Fact {
                id: i,
                name,
                partition: *p as u32,
            }
        })
        .collect();
    let set_of = |atoms: &[GroundAtom]| FactSet::from_facts(width, atoms.iter().map(|a| fact_ids[a]));

    let mut actions = Vec::with_capacity(grounded.len());
    for (i, g) in grounded.iter().enumerate() {
        let mut effects: Vec<Effect> = Vec::new();
        for (del, add) in &g.effects {
            let add = set_of(add);
            let mut del = set_of(del);
            // add-after-delete semantics
            for f in add.iter() {
                del.remove(f);
            }
            let eff = Effect::new(del, add);
            if !effects.contains(&eff) {
                effects.push(eff);
            }
        }
        actions.push(Action {
            id: ActionId(i as u32),
            name: g.name.clone(),
            pre: set_of(&g.pre),
            effects,
            partition: g.schema as u32,
        });
    }
    let init_state = State::from_facts(
        width,
        init.iter().filter(|a| fact_ids.contains_key(*a)).map(|a| fact_ids[a]),
    );
    let goal_set = set_of(&goal);
    Ok(FondTask::new(facts, actions, init_state, goal_set, TaskKind::Strips)?)
}

fn enumerate(
    candidates: &[Vec<usize>],
    binding: &mut Vec<usize>,
    ok: &mut impl FnMut(&[usize]) -> bool,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
    already: usize,
) -> Result<(), ParseError> {
    if binding.len() == candidates.len() {
        out.push(binding.clone());
        if already + out.len() > cap {
            return Err(ParseError::GroundingExplosion { cap });
        }
        return Ok(());
    }
    for &o in &candidates[binding.len()] {
        binding.push(o);
        if ok(binding) {
            enumerate(candidates, binding, ok, out, cap, already)?;
        }
        binding.pop();
    }
    Ok(())
}
