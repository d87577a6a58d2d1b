//! Seeded generator of well-typed models, and token-level mutations of them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlq_core::syntax::{reconstruct, tokenize, TokenKind};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ty {
    Int,
    Long,
    Double,
    Bool,
    Text,
}

impl Ty {
    const ALL: [Ty; 5] = [Ty::Int, Ty::Long, Ty::Double, Ty::Bool, Ty::Text];

    fn name(self) -> &'static str {
        match self {
            Ty::Int => "Int32",
            Ty::Long => "Long",
            Ty::Double => "Double",
            Ty::Bool => "Boolean",
            Ty::Text => "String",
        }
    }
}

struct Message {
    name: String,
    params: Vec<(String, Ty)>,
}

/// Names visible to an expression: properties, plus the parameters of the
/// triggering message inside a transition action.
struct Env<'a> {
    props: &'a [(String, Ty)],
    event: Option<(&'a str, &'a Message)>,
}

impl Env<'_> {
    fn names(&self, ty: Ty) -> Vec<String> {
        let mut v: Vec<String> = self.props.iter().filter(|p| p.1 == ty).map(|p| p.0.clone()).collect();
        if let Some((var, m)) = self.event {
            v.extend(m.params.iter().filter(|p| p.1 == ty).map(|p| format!("{var}.{}", p.0)));
        }
        v
    }
}

struct Gen {
    rng: ChaCha8Rng,
    out: String,
}

impl Gen {
    fn lit(&mut self, ty: Ty) -> String {
        match ty {
            Ty::Int | Ty::Long => self.rng.gen_range(0..50).to_string(),
            Ty::Double => format!("{}.{}", self.rng.gen_range(0..20), self.rng.gen_range(0..10)),
            Ty::Bool => if self.rng.gen() { "true" } else { "false" }.to_string(),
            Ty::Text => format!("\"s{}\"", self.rng.gen_range(0..10)),
        }
    }

    fn expr(&mut self, ty: Ty, env: &Env, depth: u32) -> String {
        let names = env.names(ty);
        let leaf = depth == 0 || self.rng.gen_bool(0.35);
        if leaf {
            if !names.is_empty() && self.rng.gen_bool(0.6) {
                return names.choose(&mut self.rng).unwrap().clone();
            }
            return self.lit(ty);
        }
        let d = depth - 1;
        match ty {
            Ty::Int | Ty::Long => match self.rng.gen_range(0..5) {
                0 => format!("({} + {})", self.expr(ty, env, d), self.expr(ty, env, d)),
                1 => format!("({} - {})", self.expr(ty, env, d), self.expr(ty, env, d)),
                2 => format!("({} * {})", self.expr(ty, env, d), self.expr(ty, env, d)),
                3 => format!("({} / {})", self.expr(ty, env, d), self.rng.gen_range(1..7)),
                _ => format!("({} / {})", self.expr(ty, env, d), self.expr(ty, env, d)),
            },
            Ty::Double => match self.rng.gen_range(0..4) {
                0 => format!("({} + {})", self.expr(ty, env, d), self.expr(ty, env, d)),
                1 => format!("({} * {})", self.expr(ty, env, d), self.expr(ty, env, d)),
                2 => format!("({} - {})", self.expr(ty, env, d), self.expr(Ty::Int, env, d)),
                _ => self.expr(Ty::Int, env, d),
            },
            Ty::Bool => match self.rng.gen_range(0..5) {
                0 => format!("({} < {})", self.expr(Ty::Int, env, d), self.expr(Ty::Int, env, d)),
                1 => format!("({} == {})", self.expr(Ty::Int, env, d), self.expr(Ty::Int, env, d)),
                2 => format!("({} and {})", self.expr(ty, env, d), self.expr(ty, env, d)),
                3 => format!("({} or {})", self.expr(ty, env, d), self.expr(ty, env, d)),
                _ => format!("(not {})", self.expr(ty, env, d)),
            },
            Ty::Text => {
                let other = *[Ty::Int, Ty::Text, Ty::Double].choose(&mut self.rng).unwrap();
                format!("({} + {})", self.expr(ty, env, d), self.expr(other, env, d))
            }
        }
    }

    fn line(&mut self, indent: usize, text: &str) {
        for _ in 0..indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    /// One action; sends go through `ports` as (port, messages it may send).
    fn action(&mut self, indent: usize, env: &Env, ports: &[(&str, Vec<&Message>)], depth: u32) {
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let props = env.props;
                let (name, ty) = props.choose(&mut self.rng).unwrap().clone();
                let e = self.expr(ty, env, 2);
                self.line(indent, &format!("{name} = {e}"));
            }
            4 => {
                let e = self.expr(Ty::Text, env, 2);
                self.line(indent, &format!("print {e}"));
            }
            5..=7 => {
                let (port, msgs) = ports.choose(&mut self.rng).unwrap();
                if let Some(m) = msgs.choose(&mut self.rng) {
                    let args: Vec<String> = m.params.iter().map(|(_, t)| self.expr(*t, env, 1)).collect();
                    self.line(indent, &format!("{port}!{}({})", m.name, args.join(", ")));
                }
            }
            _ if depth > 0 => {
                let c = self.expr(Ty::Bool, env, 2);
                self.line(indent, &format!("if {c} do"));
                self.action(indent + 1, env, ports, depth - 1);
                if self.rng.gen() {
                    self.line(indent, "end else do");
                    self.action(indent + 1, env, ports, depth - 1);
                }
                self.line(indent, "end");
            }
            _ => {
                let e = self.expr(Ty::Text, env, 1);
                self.line(indent, &format!("print {e}"));
            }
        }
    }

    fn block(&mut self, indent: usize, env: &Env, ports: &[(&str, Vec<&Message>)]) {
        let n = self.rng.gen_range(1..4);
        for _ in 0..n {
            self.action(indent, env, ports, 2);
        }
    }
}

/// A model that parses, resolves and passes every check. Eventless edges only
/// point forward so settling always terminates.
pub fn valid_model(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        out: String::new(),
    };
    let n_msgs = g.rng.gen_range(2..5);
    let messages: Vec<Message> = (0..n_msgs)
        .map(|i| Message {
            name: format!("m{i}"),
            params: (0..g.rng.gen_range(0..3))
                .map(|j| (format!("a{j}"), *Ty::ALL.choose(&mut g.rng).unwrap()))
                .collect(),
        })
        .collect();
    let tick = Message {
        name: "tick".into(),
        params: Vec::new(),
    };
    // Messages travelling forward along the ring, and back.
    let split = g.rng.gen_range(1..n_msgs);
    let (fwd, back) = messages.split_at(split);
    let fwd: Vec<&Message> = fwd.iter().collect();
    let back: Vec<&Message> = back.iter().collect();
    let names = |ms: &[&Message]| ms.iter().map(|m| m.name.as_str()).collect::<Vec<_>>().join(", ");

    g.line(0, &format!("// fuzz model {seed}"));
    g.line(0, "thing fragment Shared {");
    g.line(1, "message tick()");
    for m in &messages {
        let ps: Vec<String> = m.params.iter().map(|(n, t)| format!("{n} : {}", t.name())).collect();
        g.line(1, &format!("message {}({})", m.name, ps.join(", ")));
    }
    g.line(0, "}");

    let use_clock = g.rng.gen_bool(0.5);
    let n_things = g.rng.gen_range(1..4);
    for t in 0..n_things {
        let clocked = use_clock && t == 0;
        g.line(0, "");
        g.line(0, &format!("thing T{t} includes Shared {{"));
        g.line(1, &format!("required port out {{ sends {} receives {} }}", names(&fwd), names(&back)));
        g.line(1, &format!("provided port inp {{ receives {} sends {} }}", names(&fwd), names(&back)));
        if clocked {
            g.line(1, "required port clock { receives tick }");
        }
        let props: Vec<(String, Ty)> = (0..g.rng.gen_range(1..5))
            .map(|i| (format!("p{i}"), *Ty::ALL.choose(&mut g.rng).unwrap()))
            .collect();
        for (name, ty) in &props {
            let init = g.lit(*ty);
            g.line(1, &format!("property {name} : {} = {init}", ty.name()));
        }
        let ports: Vec<(&str, Vec<&Message>)> = vec![("out", fwd.clone()), ("inp", back.clone())];
        let mut events: Vec<(&str, &Message)> = fwd.iter().map(|m| ("inp", *m)).collect();
        events.extend(back.iter().map(|m| ("out", *m)));
        if clocked {
            events.push(("clock", &tick));
        }
        let n_states = g.rng.gen_range(1..5);
        let has_final = n_states > 1 && g.rng.gen_bool(0.3);
        g.line(1, &format!("statechart C{t} init S0 {{"));
        let plain = Env {
            props: &props,
            event: None,
        };
        if g.rng.gen_bool(0.3) {
            g.line(2, "on entry do");
            g.block(3, &plain, &ports);
            g.line(2, "end");
        }
        for s in 0..n_states {
            let is_final = has_final && s == n_states - 1;
            g.line(2, &format!("{}state S{s} {{", if is_final { "final " } else { "" }));
            if g.rng.gen_bool(0.4) {
                g.line(3, "on entry do");
                g.block(4, &plain, &ports);
                g.line(3, "end");
            }
            if g.rng.gen_bool(0.3) {
                g.line(3, "on exit do");
                g.block(4, &plain, &ports);
                g.line(3, "end");
            }
            if !is_final {
                let mut evs = events.clone();
                evs.shuffle(&mut g.rng);
                let take = g.rng.gen_range(0..=evs.len());
                for (port, m) in evs.into_iter().take(take) {
                    let target = g.rng.gen_range(0..n_states);
                    let bind = !m.params.is_empty() && g.rng.gen_bool(0.7);
                    let head = if bind {
                        format!("transition -> S{target} event e : {port}?{}", m.name)
                    } else {
                        format!("transition -> S{target} event {port}?{}", m.name)
                    };
                    let env = Env {
                        props: &props,
                        event: bind.then_some(("e", m)),
                    };
                    if g.rng.gen_bool(0.8) {
                        g.line(3, &format!("{head} action do"));
                        g.block(4, &env, &ports);
                        g.line(3, "end");
                    } else {
                        g.line(3, &head);
                    }
                }
                if s + 1 < n_states && g.rng.gen_bool(0.3) {
                    let target = g.rng.gen_range(s + 1..n_states);
                    g.line(3, &format!("transition -> S{target} action do"));
                    g.block(4, &plain, &ports);
                    g.line(3, "end");
                }
            }
            g.line(2, "}");
        }
        g.line(1, "}");
        g.line(0, "}");
    }

    g.line(0, "");
    g.line(0, "configuration Fuzz {");
    let mut instances = Vec::new();
    for t in 0..n_things {
        for k in 0..g.rng.gen_range(1..3) {
            let name = format!("t{t}_{k}");
            g.line(1, &format!("instance {name} : T{t}"));
            instances.push((name, t));
        }
    }
    if instances.len() == 1 {
        instances.push(("t0_1".into(), 0));
        g.line(1, "instance t0_1 : T0");
    }
    if use_clock {
        let period = g.rng.gen_range(1..4);
        let ticks = g.rng.gen_range(1..5);
        g.line(1, &format!("instance clk : Clock @period \"{period}\" @ticks \"{ticks}\""));
    }
    for k in 0..instances.len() {
        if k == 0 || g.rng.gen_bool(0.8) {
            let next = &instances[(k + 1) % instances.len()].0;
            g.line(1, &format!("connector {}.out => {next}.inp", instances[k].0));
        }
    }
    if use_clock {
        for (name, t) in &instances {
            if *t == 0 {
                g.line(1, &format!("connector {name}.clock => clk.clock"));
            }
        }
    }
    g.line(0, "}");
    g.out
}

const NOISE: &[&str] = &[
    "thing", "state", "transition", "->", "{", "}", "(", ")", "do", "end", "event", "action", "Int32", "Boolean",
    "String", "Double", "final", "init", "!", "?", ".", ":", "=", "+", "\"", "0", "1.5", "true", "x", "p0", "m0",
    "S0", "S1", "T0", "out", "inp", "if", "else", "not", "@a", "//", "/*", "@",
];

/// Applies one to three random token edits: delete, duplicate, swap, or
/// replace with another token from the file or a fixed noise list.
pub fn mutate(src: &str, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tokens, _) = tokenize(src, "fuzz");
    let eof = tokens.pop();
    if tokens.is_empty() {
        return src.to_string();
    }
    let pool: Vec<String> = tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Eof)
        .map(|t| t.lexeme.clone())
        .collect();
    for _ in 0..rng.gen_range(1..4) {
        let i = rng.gen_range(0..tokens.len());
        match rng.gen_range(0..5) {
            0 if tokens.len() > 1 => {
                tokens.remove(i);
            }
            1 => {
                let t = tokens[i].clone();
                tokens.insert(i, t);
            }
            2 => {
                let j = rng.gen_range(0..tokens.len());
                let a = tokens[i].lexeme.clone();
                tokens[i].lexeme = std::mem::replace(&mut tokens[j].lexeme, a);
            }
            3 => tokens[i].lexeme = pool.choose(&mut rng).unwrap().clone(),
            _ => tokens[i].lexeme = NOISE.choose(&mut rng).unwrap().to_string(),
        }
        let k = i.min(tokens.len() - 1);
        if tokens[k].leading.is_empty() {
            tokens[k].leading = " ".into();
        }
    }
    tokens.extend(eof);
    reconstruct(&tokens)
}

/// Milder edits that often keep a model well-formed: drop, duplicate or
/// swap whole lines, or rename one identifier to another from the file.
pub fn mutate_lines(src: &str, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines: Vec<String> = src.lines().map(str::to_string).collect();
    for _ in 0..rng.gen_range(1..3) {
        let i = rng.gen_range(0..lines.len());
        match rng.gen_range(0..4) {
            0 => {
                lines.remove(i);
            }
            1 => {
                let l = lines[i].clone();
                lines.insert(i, l);
            }
            2 => {
                let j = rng.gen_range(0..lines.len());
                lines.swap(i, j);
            }
            _ => {
                let (tokens, _) = tokenize(&lines[i], "line");
                let idents: Vec<usize> = (0..tokens.len()).filter(|&k| tokens[k].kind == TokenKind::Ident).collect();
                let (all, _) = tokenize(src, "fuzz");
                let pool: Vec<&str> = all
                    .iter()
                    .filter(|t| t.kind == TokenKind::Ident)
                    .map(|t| t.lexeme.as_str())
                    .collect();
                if let (Some(&k), Some(name)) = (idents.choose(&mut rng), pool.choose(&mut rng)) {
                    let mut tokens = tokens;
                    tokens[k].lexeme = name.to_string();
                    lines[i] = reconstruct(&tokens);
                }
            }
        }
        if lines.is_empty() {
            break;
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
