use normgap::weyl::WeylFamily;
use normgap::teleport::TransferMapW;
use normgap::linalg;

fn main() {
    for n in [2usize, 3, 5, 7] {
        let family = WeylFamily::new(n).unwrap();
        let w = TransferMapW::new(&family);
        for k in 0..n {
            for l in 0..n {
                let choi = w.component_choi(k, l);
                let eigs = choi.clone().symmetric_eigen().eigenvalues;
                let nan = eigs.iter().any(|v| v.is_nan());
                if nan {
                    println!("n={n} k={k} l={l}: NaN eigenvalues");
                }
            }
        }
        println!("n={n} done");
    }
}
