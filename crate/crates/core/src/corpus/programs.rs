//! The SAT programs of the examples, as source text.

use crate::reader::{parse_program, Program};
use crate::terms::PredInd;
use crate::transform::{self, BackjumpSpec, ClauseRef, Exemption, IdPolicy};

pub const P1: &str = "\
sat_cl( [Pol-Pol|Pairs] ).
sat_cl( [H|Pairs] ) :- sat_cl( Pairs ).
sat_cnf( [] ).
sat_cnf( [Clause|Clauses] ) :-
                    sat_cl( Clause ), sat_cnf( Clauses ).
";

const SAT_CL_LEVELED: &str = "\
sat_cl( [Pol-V|_Pairs], _L, _HL ) :-
        nonvar(V), V=(_,Pol).
sat_cl( [Pol-V|_Pairs], L, _HL ) :-
        var(V), V=(L,Pol).
sat_cl( [_-V|Pairs], L, HL ) :-
        new_highest( V, HL, HLnew ),
        sat_cl( Pairs, L, HLnew ).
";

const SAT_CL_THROW: &str = "\
sat_cl( [], _, HL ) :- HL>=0, throw( HL ).
";

pub const NEW_HIGHEST: &str = "\
new_highest( V, H, H ) :- var( V ).
new_highest( V, H, H ) :- nonvar( V ), V=(L,_Value), H>=L.
new_highest( V, H, L ) :- nonvar( V ), V=(L,_Value), H<L.
";

const SAT_CNF_LEVELED: &str = "\
sat_cnf( [], _L ).
sat_cnf( [Clause|Clauses], L ) :-
        sat_cl( Clause, L, -1 ),
        Lnew is L+1,
        sat_cnf( Clauses, Lnew ).
";

const SAT_CNF_CATCH: &str = "\
sat_cnf( [], _L ).
sat_cnf( [Clause|Clauses], L ) :-
        sat_cl( Clause, L, -1 ),
        Lnew is L+1,
        catch( sat_cnf( Clauses, Lnew ),
               L,
               fail
              ).
";

pub const PB: &str = "\
sat_b( [] ).
sat_b( [[Pol-Pol|_]|Clauses] ) :- sat_b( Clauses ).
sat_b( [[_|Pairs]|Clauses] ) :- sat_b( [Pairs|Clauses] ).
";

const SAT_B_11: &str = "\
sat_b( [], _L, _HL ).
";

const SAT_B_12: &str = "\
sat_b( [[Pol-V|_] | Clauses], L, _HL ) :- nonvar(V),
        V=(_,Pol), Lnew is L+1,
        sat_b( Clauses, Lnew, -1 ).
";

const SAT_B_13: &str = "\
sat_b( [[Pol-V|_] | Clauses], L, _HL ) :- var(V),
        V=(L,Pol), Lnew is L+1,
        sat_b( Clauses, Lnew, -1 ).
";

const SAT_B_14: &str = "\
sat_b( [[_-V|Pairs] | Clauses], L, HL ) :-
        Lnew is L+1,
        new_highest( V, HL, HLnew ),
        sat_b( [Pairs | Clauses], Lnew, HLnew ).
";

const SAT_B_15: &str = "\
sat_b( [[] | _Clauses], _L, HL ) :-  HL>=0, throw( HL ).
";

const SAT_B_16: &str = "\
sat_b( [[Pol-V|_] | Clauses], L, _HL ) :-
        catch( ( var(V), V=(L,Pol), Lnew is L+1,
                 sat_b(Clauses, Lnew, -1)
               ),
               L,
               fail
             ).
";

const SAT_B_1A: &str = "\
sat_b( [[Pol-V|Pairs] | Clauses], L, HL ) :-
   catch( (nonvar(V), V=(_,Pol), Lnew is L+1, sat_b(Clauses, Lnew, -1)
           ; throw(L)
          ),
          L,
          catch( (var(V), V=(L,Pol), Lnew is L+1, sat_b(Clauses, Lnew, -1)
                  ; throw(L)
                 ),
                 L,
                 catch( (Lnew is L+1, new_highest(V, HL, HLnew),
                         sat_b([Pairs|Clauses], Lnew, HLnew)
                         ; throw(L)
                        ),
                        L,
                        fail
                      ) ) ).
";

/// Clause 13 registering its level as a target, for the native engine.
const SAT_B_13_NATIVE: &str = "\
sat_b( [[Pol-V|_] | Clauses], L, _HL ) :- bt_register(L), var(V),
        V=(L,Pol), Lnew is L+1,
        sat_b( Clauses, Lnew, -1 ).
";

const SAT_B_15_NATIVE: &str = "\
sat_b( [[] | _Clauses], _L, HL ) :-  HL>=0, backjump( HL ).
";

const SAT_B_15_DB: &str = "\
sat_b( [[] | _Clauses], _L, HL ) :-  HL>=0, assertz( target(HL) ), fail.
";

/// Clauses 12 and 14 with a catch that must never fire.
const SAT_B_12_WATCHED: &str = "\
sat_b( [[Pol-V|_] | Clauses], L, _HL ) :-
        catch( ( nonvar(V), V=(_,Pol), Lnew is L+1,
                 sat_b( Clauses, Lnew, -1 ) ),
               L,
               throw( exemption_violated(L) ) ).
";

const SAT_B_14_WATCHED: &str = "\
sat_b( [[_-V|Pairs] | Clauses], L, HL ) :-
        catch( ( Lnew is L+1,
                 new_highest( V, HL, HLnew ),
                 sat_b( [Pairs | Clauses], Lnew, HLnew ) ),
               L,
               throw( exemption_violated(L) ) ).
";

/// The programs of the corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Named {
    P1,
    P2,
    P3,
    Pb,
    Pb2,
    Pb3,
    Pb3a,
    /// Pb2 with native backjumping to the level of clause 13.
    Pb2Native,
    /// Pb2 with database-simulated backjumping.
    Pb2Db,
    /// Pb3 whose clauses 12 and 14 raise an error if they ever catch.
    Pb3Watched,
}

impl Named {
    pub const ALL: [Named; 10] = [
        Named::P1,
        Named::P2,
        Named::P3,
        Named::Pb,
        Named::Pb2,
        Named::Pb3,
        Named::Pb3a,
        Named::Pb2Native,
        Named::Pb2Db,
        Named::Pb3Watched,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Named::P1 => "P1",
            Named::P2 => "P2",
            Named::P3 => "P3",
            Named::Pb => "Pb",
            Named::Pb2 => "Pb2",
            Named::Pb3 => "Pb3",
            Named::Pb3a => "Pb3a",
            Named::Pb2Native => "Pb2-native",
            Named::Pb2Db => "Pb2-db",
            Named::Pb3Watched => "Pb3-watched",
        }
    }

    pub fn source(self) -> String {
        let parts: &[&str] = match self {
            Named::P1 => &[P1],
            Named::P2 => &[SAT_CL_LEVELED, NEW_HIGHEST, SAT_CNF_LEVELED],
            Named::P3 => &[SAT_CL_LEVELED, SAT_CL_THROW, NEW_HIGHEST, SAT_CNF_CATCH],
            Named::Pb => &[PB],
            Named::Pb2 => &[SAT_B_11, SAT_B_12, SAT_B_13, SAT_B_14, NEW_HIGHEST],
            Named::Pb3 => &[SAT_B_11, SAT_B_12, SAT_B_16, SAT_B_14, SAT_B_15, NEW_HIGHEST],
            Named::Pb3a => &[SAT_B_11, SAT_B_1A, SAT_B_15, NEW_HIGHEST],
            Named::Pb2Native => &[SAT_B_11, SAT_B_12, SAT_B_13_NATIVE, SAT_B_14, SAT_B_15_NATIVE, NEW_HIGHEST],
            Named::Pb2Db => return format!("{}", pb2_db()),
            Named::Pb3Watched => {
                &[SAT_B_11, SAT_B_12_WATCHED, SAT_B_16, SAT_B_14_WATCHED, SAT_B_15, NEW_HIGHEST]
            }
        };
        parts.concat()
    }

    pub fn program(self) -> Program {
        match self {
            Named::Pb2Db => pb2_db(),
            _ => parse_program(&self.source()).expect("corpus programs parse"),
        }
    }

    /// The procedure the query calls.
    pub fn entry(self) -> PredInd {
        match self {
            Named::P1 => PredInd::new("sat_cnf", 1),
            Named::P2 | Named::P3 => PredInd::new("sat_cnf", 2),
            Named::Pb => PredInd::new("sat_b", 1),
            _ => PredInd::new("sat_b", 3),
        }
    }

    /// Whether answers carry `(Level, Value)` pairs.
    pub fn leveled(self) -> bool {
        !matches!(self, Named::P1 | Named::Pb)
    }

    pub fn native(self) -> bool {
        self == Named::Pb2Native
    }
}

/// Pb2 plus the clause starting a simulated backjump, before transformation.
pub fn pb2_db_source() -> String {
    [SAT_B_11, SAT_B_12, SAT_B_13, SAT_B_14, SAT_B_15_DB, NEW_HIGHEST].concat()
}

/// The database simulation spec for Pb2: only the clause after clause 13
/// (where the level was assigned) resumes a backjump to that level.
pub fn pb2_db_spec() -> BackjumpSpec {
    let sat_b = PredInd::new("sat_b", 3);
    let nh = PredInd::new("new_highest", 3);
    let mut spec = BackjumpSpec::targets([sat_b.clone(), nh.clone()]).with_id_policy(IdPolicy::FromArg(2));
    for i in [1, 2, 3, 5] {
        spec = spec.exempt(ClauseRef { pred: sat_b.clone(), index: i }, Exemption::Unchanged);
    }
    for i in 1..=3 {
        spec = spec.exempt(ClauseRef { pred: nh.clone(), index: i }, Exemption::Unchanged);
    }
    spec
}

pub fn pb2_db() -> Program {
    let src = parse_program(&pb2_db_source()).expect("corpus programs parse");
    transform::dbsim(&src, &pb2_db_spec()).expect("corpus spec is valid")
}

/// Pb2 with the throw clause, the input of approach 1 producing Pb3.
pub fn pb2_with_throw() -> Program {
    parse_program(&[SAT_B_11, SAT_B_12, SAT_B_13, SAT_B_14, SAT_B_15, NEW_HIGHEST].concat())
        .expect("corpus programs parse")
}

/// Approach 1 restricted to clause 13, with the level as identifier.
pub fn pb3_spec() -> BackjumpSpec {
    let sat_b = PredInd::new("sat_b", 3);
    let mut spec = BackjumpSpec::targets([sat_b.clone()]).with_id_policy(IdPolicy::FromArg(2));
    for i in [1, 2, 4, 5] {
        spec = spec.exempt(ClauseRef { pred: sat_b.clone(), index: i }, Exemption::Unchanged);
    }
    spec
}

/// P2 as the input of approach 2 producing P3 (throw clause added).
pub fn p2_with_throw() -> Program {
    parse_program(&[SAT_CL_LEVELED, SAT_CL_THROW, NEW_HIGHEST, SAT_CNF_LEVELED].concat())
        .expect("corpus programs parse")
}

/// Approach 2 on the recursive `sat_cnf/2` clause, split after `Lnew is L+1`.
pub fn p3_spec() -> BackjumpSpec {
    BackjumpSpec::default()
        .with_id_policy(IdPolicy::FromArg(2))
        .split(ClauseRef::new("sat_cnf", 2, 2), 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::format_clause;

    fn procedure_sizes(n: Named) -> Vec<(String, usize)> {
        n.program().procedures.iter().map(|(k, v)| (k.to_string(), v.len())).collect()
    }

    #[test]
    fn all_parse() {
        for n in Named::ALL {
            let p = n.program();
            assert!(p.procedure(&n.entry()).is_some(), "{}", n.name());
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(Named::P1.program().clause_count(), 4);
        assert_eq!(
            procedure_sizes(Named::P3),
            [("sat_cl/3".into(), 4), ("new_highest/3".into(), 3), ("sat_cnf/2".into(), 2)]
        );
        assert_eq!(procedure_sizes(Named::Pb3)[0], ("sat_b/3".into(), 5));
        assert_eq!(procedure_sizes(Named::Pb3a)[0], ("sat_b/3".into(), 3));
        let p3 = Named::P3.program();
        let throw = &p3.procedure(&PredInd::new("sat_cl", 3)).unwrap()[3];
        assert_eq!(crate::reader::format(&throw.body), "(HL>=0,throw(HL))");
    }

    #[test]
    fn pb3a_body_nesting() {
        let p = Named::Pb3a.program();
        let c = &p.procedure(&PredInd::new("sat_b", 3)).unwrap()[1];
        let mut depth = 0;
        let mut t = c.body.clone();
        while t.is_functor("catch", 3) {
            depth += 1;
            assert!(t.args()[0].is_functor(";", 2));
            assert!(t.args()[0].args()[1].is_functor("throw", 1));
            t = t.args()[2].clone();
        }
        assert_eq!(depth, 3);
        assert_eq!(t, crate::terms::Term::atom("fail"));
    }

    #[test]
    fn approach1_yields_pb3() {
        let out = transform::approach1(&pb2_with_throw(), &pb3_spec()).unwrap();
        let pb3 = Named::Pb3.program();
        let pi = PredInd::new("sat_b", 3);
        let got: Vec<String> = out.procedure(&pi).unwrap().iter().map(format_clause).collect();
        let want: Vec<String> = pb3.procedure(&pi).unwrap().iter().map(format_clause).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn approach2_yields_p3() {
        let out = transform::approach2(&p2_with_throw(), &p3_spec()).unwrap();
        let pi = PredInd::new("sat_cnf", 2);
        let got: Vec<String> = out.procedure(&pi).unwrap().iter().map(format_clause).collect();
        let want: Vec<String> =
            Named::P3.program().procedure(&pi).unwrap().iter().map(format_clause).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn db_program_shape() {
        let p = pb2_db();
        let sat_b = p.procedure(&PredInd::new("sat_b", 3)).unwrap();
        let text: Vec<String> = sat_b.iter().map(|c| crate::reader::format(&c.body)).collect();
        assert!(text[0].starts_with("(\\+ target(_),"), "{}", text[0]);
        assert!(text[3].starts_with("(catch(L),"), "{}", text[3]);
        assert!(p.procedure(&PredInd::new("catch", 1)).is_some());
        assert!(p.dynamic.contains(&PredInd::new("target", 1)));
        // printed and re-read, the program is unchanged
        let again = parse_program(&Named::Pb2Db.source()).unwrap();
        assert_eq!(format!("{again}"), format!("{p}"));
    }
}
