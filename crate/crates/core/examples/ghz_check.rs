//! The three-record parity argument, printed as a report.

use wfcheck::checks::ghz_check;
use wfcheck::interpret::FactHolderPolicy;

fn main() {
    let r = ghz_check(FactHolderPolicy::InteractingOnly).unwrap();
    for f in &r.findings {
        let show: Vec<String> = f.predictions.iter().map(|p| format!("{} = {}", p.rule, p.value)).collect();
        println!("{}\n    {}", f.claim, show.join(", "));
    }
    let s = r.search.as_ref().unwrap();
    println!("{} of {} assignments survive", s.satisfying.len(), s.domain_size);
    if let Some(fp) = &s.formal_product {
        println!("({})^2 = {}  =>  product = {}", fp.monomial.join(" "), fp.square, fp.value);
    }
    println!("verdict: {:?}", r.verdict);
}
