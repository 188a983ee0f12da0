//! Parity games: arenas, a recursive attractor-based solver with positional
//! strategies, and the model-checking game of a structure and a formula.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::closure::{CNode, Closure};
use crate::error::Result;
use crate::formula::{ensure_well_formed, minimal_priority_assignment, Formula, Literal, PriorityAssignment};
use crate::kripke::KripkeStructure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Player {
    Even,
    Odd,
}

impl Player {
    pub fn of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Even
        } else {
            Player::Odd
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Even => Player::Odd,
            Player::Odd => Player::Even,
        }
    }
}

/// A parity game. A position without moves is won by the player of the
/// parity of its priority.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Arena {
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    pub moves: Vec<Vec<usize>>,
    pub initial: usize,
    /// Optional human-readable names, one per position.
    pub labels: Vec<String>,
}

impl Arena {
    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn add(&mut self, owner: Player, priority: u32, label: impl Into<String>) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.moves.push(Vec::new());
        self.labels.push(label.into());
        self.owner.len() - 1
    }

    pub fn add_move(&mut self, from: usize, to: usize) {
        if !self.moves[from].contains(&to) {
            self.moves[from].push(to);
        }
    }
}

/// Positional strategy: defined on the owner's positions that have moves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Strategy {
    pub choice: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub win_even: BTreeSet<usize>,
    pub win_odd: BTreeSet<usize>,
    pub strat_even: Strategy,
    pub strat_odd: Strategy,
}

impl Solution {
    pub fn winner(&self, v: usize) -> Player {
        if self.win_even.contains(&v) {
            Player::Even
        } else {
            Player::Odd
        }
    }
}

struct Game<'a> {
    owner: &'a [Player],
    priority: &'a [u32],
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Game<'_> {
    /// Attractor of `target` for `p` inside `sub`, recording attracting moves.
    fn attractor(&self, sub: &[bool], target: &[usize], p: Player, strat: &mut [Option<usize>]) -> Vec<bool> {
        let n = self.owner.len();
        let mut attr = vec![false; n];
        let mut count: Vec<usize> =
            (0..n).map(|v| if sub[v] { self.succ[v].iter().filter(|&&w| sub[w]).count() } else { 0 }).collect();
        let mut queue = VecDeque::new();
        for &t in target {
            if sub[t] && !attr[t] {
                attr[t] = true;
                queue.push_back(t);
            }
        }
        while let Some(w) = queue.pop_front() {
            for &v in &self.pred[w] {
                if !sub[v] || attr[v] {
                    continue;
                }
                if self.owner[v] == p {
                    attr[v] = true;
                    strat[v] = Some(w);
                    queue.push_back(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        attr[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        attr
    }

    /// Returns the winning regions of `sub` as flags, filling `strat` for the
    /// winner's positions in each region.
    fn zielonka(&self, sub: &[bool], strat: &mut [Option<usize>]) -> Vec<Option<Player>> {
        let n = self.owner.len();
        let mut win = vec![None; n];
        let Some(d) = (0..n).filter(|&v| sub[v]).map(|v| self.priority[v]).max() else {
            return win;
        };
        let p = Player::of_priority(d);
        let top: Vec<usize> = (0..n).filter(|&v| sub[v] && self.priority[v] == d).collect();
        let mut attr_strat = vec![None; n];
        let a = self.attractor(sub, &top, p, &mut attr_strat);
        let rest: Vec<bool> = (0..n).map(|v| sub[v] && !a[v]).collect();
        let mut inner_strat = vec![None; n];
        let w1 = self.zielonka(&rest, &mut inner_strat);
        if (0..n).all(|v| w1[v] != Some(p.opponent())) {
            for v in 0..n {
                if !sub[v] {
                    continue;
                }
                win[v] = Some(p);
                if self.owner[v] == p {
                    strat[v] = if rest[v] {
                        inner_strat[v]
                    } else if let Some(w) = attr_strat[v] {
                        Some(w)
                    } else {
                        // Top-priority position: any move staying in the subgame.
                        self.succ[v].iter().copied().find(|&w| sub[w])
                    };
                }
            }
            return win;
        }
        let opp = p.opponent();
        let opp_region: Vec<usize> = (0..n).filter(|&v| w1[v] == Some(opp)).collect();
        let mut b_strat = vec![None; n];
        let b = self.attractor(sub, &opp_region, opp, &mut b_strat);
        let rest2: Vec<bool> = (0..n).map(|v| sub[v] && !b[v]).collect();
        let mut strat2 = vec![None; n];
        let w2 = self.zielonka(&rest2, &mut strat2);
        for v in 0..n {
            if !sub[v] {
                continue;
            }
            if b[v] {
                win[v] = Some(opp);
                if self.owner[v] == opp {
                    strat[v] = if w1[v] == Some(opp) { inner_strat[v] } else { b_strat[v] };
                }
            } else {
                win[v] = w2[v];
                if Some(self.owner[v]) == w2[v] {
                    strat[v] = strat2[v];
                }
            }
        }
        win
    }
}

/// Solves the game. Dead ends are treated as self-loops carrying their own
/// priority; those loops never appear in the returned strategies.
pub fn solve(a: &Arena) -> Solution {
    let n = a.len();
    let succ: Vec<Vec<usize>> =
        (0..n).map(|v| if a.moves[v].is_empty() { vec![v] } else { a.moves[v].clone() }).collect();
    let mut pred = vec![Vec::new(); n];
    for (v, ws) in succ.iter().enumerate() {
        for &w in ws {
            pred[w].push(v);
        }
    }
    let game = Game { owner: &a.owner, priority: &a.priority, succ, pred };
    let mut strat = vec![None; n];
    let win = game.zielonka(&vec![true; n], &mut strat);
    let mut sol = Solution {
        win_even: BTreeSet::new(),
        win_odd: BTreeSet::new(),
        strat_even: Strategy::default(),
        strat_odd: Strategy::default(),
    };
    for v in 0..n {
        let w = win[v].expect("every position is decided");
        match w {
            Player::Even => sol.win_even.insert(v),
            Player::Odd => sol.win_odd.insert(v),
        };
        if a.moves[v].is_empty() {
            continue;
        }
        // Losing positions still need a legal choice; prefer staying home.
        let choice = if a.owner[v] == w {
            strat[v].expect("winner has a strategy")
        } else {
            a.moves[v].iter().copied().find(|&t| win[t] == Some(a.owner[v])).unwrap_or(a.moves[v][0])
        };
        match a.owner[v] {
            Player::Even => sol.strat_even.choice.insert(v, choice),
            Player::Odd => sol.strat_odd.choice.insert(v, choice),
        };
    }
    sol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pos {
    Sub(usize, usize),
    Dia(usize, usize),
}

/// The model-checking game for `m` and `f` under `omega`.
///
/// Even owns disjunctions, `\/B` helpers and `<>psi` helpers; Odd owns
/// conjunctions and modal positions. `(s, ->B)` moves to `(s', \/B)` for every
/// successor `s'` and to `(s, <>psi)` for every `psi` in `B`. Literal positions
/// get priority 0 when satisfied and 1 otherwise; any other dead end is lost
/// by the player who is stuck. Variable positions carry their priority, all
/// other positions the least priority in use.
pub fn build_mc_game(m: &KripkeStructure, f: &Formula, omega: &PriorityAssignment) -> Result<Arena> {
    ensure_well_formed(f)?;
    let mut cl = Closure::new(f, omega);
    let base = omega.entries.values().copied().min().unwrap_or(0);
    let mut b = McBuilder { m, base, arena: Arena::default(), ids: HashMap::new(), pos: Vec::new() };
    b.arena.initial = b.intern(Pos::Sub(m.init, cl.root), &cl);
    let mut next = 0;
    while next < b.pos.len() {
        let here = next;
        next += 1;
        let targets: Vec<Pos> = match b.pos[here] {
            Pos::Sub(s, c) => match cl.node(c).clone() {
                CNode::Top | CNode::Bottom | CNode::Lit(_) => Vec::new(),
                CNode::Var { binder, .. } => vec![Pos::Sub(s, binder)],
                CNode::Fix { body, .. } => vec![Pos::Sub(s, body)],
                CNode::And(x, y) | CNode::Or(x, y) => vec![Pos::Sub(s, x), Pos::Sub(s, y)],
                CNode::Join(ms) => ms.into_iter().map(|x| Pos::Sub(s, x)).collect(),
                CNode::Modal(bs) => {
                    let j = cl.join(bs.clone());
                    let mut out: Vec<Pos> = m.succ[s].iter().map(|&t| Pos::Sub(t, j)).collect();
                    out.extend(bs.into_iter().map(|x| Pos::Dia(s, x)));
                    out
                }
            },
            Pos::Dia(s, c) => m.succ[s].iter().map(|&t| Pos::Sub(t, c)).collect(),
        };
        for t in targets {
            let j = b.intern(t, &cl);
            b.arena.add_move(here, j);
        }
    }
    Ok(b.arena)
}

struct McBuilder<'a> {
    m: &'a KripkeStructure,
    base: u32,
    arena: Arena,
    ids: HashMap<Pos, usize>,
    pos: Vec<Pos>,
}

impl McBuilder<'_> {
    fn intern(&mut self, pos: Pos, cl: &Closure) -> usize {
        if let Some(&i) = self.ids.get(&pos) {
            return i;
        }
        let m = self.m;
        let base = self.base;
        let (owner, prio, label) = match pos {
            Pos::Sub(s, c) => {
                let (owner, prio) = match cl.node(c) {
                    CNode::Top => (Player::Even, 0),
                    CNode::Bottom | CNode::Lit(Literal::False) => (Player::Even, 1),
                    CNode::Lit(Literal::Pos(p)) => (Player::Even, u32::from(!m.holds(s, p))),
                    CNode::Lit(Literal::Neg(p)) => (Player::Even, u32::from(m.holds(s, p))),
                    CNode::Var { .. } => (Player::Even, cl.weight(c)),
                    CNode::Or(..) | CNode::Join(..) | CNode::Fix { .. } => (Player::Even, base),
                    CNode::And(..) => (Player::Odd, base),
                    // Odd is stuck only without successors and with B empty.
                    CNode::Modal(_) => (Player::Odd, if m.succ[s].is_empty() { 0 } else { base }),
                };
                (owner, prio, format!("{}, {}", m.names[s], cl.text(c)))
            }
            Pos::Dia(s, c) => {
                let prio = if m.succ[s].is_empty() { 1 } else { base };
                (Player::Even, prio, format!("{}, <>{}", m.names[s], cl.text(c)))
            }
        };
        let i = self.arena.add(owner, prio, label);
        self.ids.insert(pos, i);
        self.pos.push(pos);
        i
    }
}

/// `m, s0 |= f`, decided by the model-checking game under the least priority
/// assignment.
pub fn models(m: &KripkeStructure, f: &Formula) -> Result<bool> {
    let omega = minimal_priority_assignment(f)?;
    let arena = build_mc_game(m, f, &omega)?;
    Ok(solve(&arena).win_even.contains(&arena.initial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::parse_structure;
    use crate::parse::parse_formula;

    fn single(owner: Player, prio: u32) -> Arena {
        let mut a = Arena::default();
        a.add(owner, prio, "v");
        a.add_move(0, 0);
        a
    }

    #[test]
    fn self_loops() {
        let s = solve(&single(Player::Even, 0));
        assert!(s.win_even.contains(&0));
        assert_eq!(s.strat_even.choice[&0], 0);
        let s = solve(&single(Player::Even, 1));
        assert!(s.win_odd.contains(&0));
    }

    #[test]
    fn dead_ends_follow_priority_parity() {
        let mut a = Arena::default();
        let v = a.add(Player::Even, 0, "v");
        let d = a.add(Player::Odd, 3, "d");
        a.add_move(v, d);
        let s = solve(&a);
        assert!(s.win_odd.contains(&v));
        assert!(s.strat_odd.choice.is_empty());
    }

    #[test]
    fn even_escapes_to_even_cycle() {
        let mut a = Arena::default();
        let v = a.add(Player::Even, 1, "v");
        let w = a.add(Player::Odd, 2, "w");
        a.add_move(v, v);
        a.add_move(v, w);
        a.add_move(w, w);
        let s = solve(&a);
        assert_eq!(s.win_even, BTreeSet::from([v, w]));
        assert_eq!(s.strat_even.choice[&v], w);
    }

    #[test]
    fn model_checking_examples() {
        let m = parse_structure("state s0 p\ninit s0").unwrap();
        let f = parse_formula("p").unwrap();
        let a = build_mc_game(&m, &f, &minimal_priority_assignment(&f).unwrap()).unwrap();
        assert!(a.moves[a.initial].is_empty());
        assert_eq!(a.priority[a.initial] % 2, 0);
        assert!(models(&m, &f).unwrap());
        assert!(models(&m, &parse_formula("->{}").unwrap()).unwrap());
        assert!(!models(&m, &parse_formula("->{tt}").unwrap()).unwrap());

        let cyc = parse_structure("state s0 a\nstate s1 a\ninit s0\nedge s0 s1\nedge s1 s0").unwrap();
        let f = parse_formula("nu X. mu Y. (a & ->{X}) | (~a & ->{Y})").unwrap();
        assert!(models(&cyc, &f).unwrap());

        let finite = parse_formula("mu X. ->{X} | ->{}").unwrap();
        let chain = parse_structure("state s0\nstate s1\ninit s0\nedge s0 s1").unwrap();
        assert!(models(&chain, &finite).unwrap());
        let lp = parse_structure("state s0\ninit s0\nedge s0 s0").unwrap();
        assert!(!models(&lp, &finite).unwrap());
    }

    #[test]
    fn box_and_diamond() {
        let m = parse_structure("state s0\nstate s1 p\nstate s2\ninit s0\nedge s0 s1\nedge s0 s2").unwrap();
        assert!(models(&m, &Formula::diamond(Formula::prop("p"))).unwrap());
        assert!(!models(&m, &Formula::boxed(Formula::prop("p"))).unwrap());
    }
}
