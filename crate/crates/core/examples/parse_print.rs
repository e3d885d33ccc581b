//! Parse a scenario, print its canonical form, and show located diagnostics.

use wfcheck::scenario::{parse, print};

const SOURCE: &str = "
# Alice copies a qubit, Bob reads her record
scenario demo
agent Alice
observer Bob
system S 2
agent Alice record rA dim 2 pointer comp init 0
prepare [0.6, 0.8i] on S
interact Alice on S in comp record rA -> ra
read Bob rA -> rb
";

fn main() {
    let s = parse(SOURCE).expect("valid scenario");
    println!("{} events over {:?}", s.timeline.len(), s.layout.ids());
    print!("{}", print(&s));

    let broken = SOURCE.replace("[0.6, 0.8i]", "[0.6, 0.6]").replace("read Bob rA", "read Bob rZ");
    match parse(&broken) {
        Ok(_) => println!("unexpectedly valid"),
        Err(f) => {
            for e in f.errors {
                println!("error at {e}");
            }
        }
    }
}
