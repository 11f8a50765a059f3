use nanocyl::modesolver::*;
use nanocyl::interfaces::*;
use num_complex::Complex64 as C;

fn main() {
    // a=2000 scan: where are the roots?
    let stack = RadialStack::standard(2000.0, 5.0).unwrap();
    let n_hi = 3.45 * (1.0 - 1e-5);
    println!("--- scan minima at a=2000 (TE11) ---");
    let pts = 400;
    let mut vals = Vec::new();
    for i in 0..pts {
        let x = 0.01 + (n_hi - 0.01) * i as f64 / (pts - 1) as f64;
        let r = dispersion_residual(C::new(x, 0.0), &stack, 950.0, ModeFamily::TE11)
            .map(|v| v.norm()).unwrap_or(f64::NAN);
        vals.push((x, r));
    }
    let mut mags: Vec<f64> = vals.iter().map(|v| v.1).filter(|r| r.is_finite()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = mags[mags.len()/2];
    println!("median = {:.3e}, nan count = {}", median, vals.iter().filter(|v| v.1.is_nan()).count());
    for i in 1..pts-1 {
        if vals[i].1 <= vals[i-1].1 && vals[i].1 <= vals[i+1].1 && vals[i].1 < median {
            if vals[i].0 > 3.3 { println!("min near top: n = {:.5}, |res| = {:.3e}", vals[i].0, vals[i].1); }
        }
    }
    match find_fundamental(&stack, 950.0, ModeFamily::TE11) {
        Ok(n) => println!("find_fundamental: {:.6}+{:.6}i -> |r_t|^2 = {:.4}", n.re, n.im,
            ((n - 1.0)/(n + 1.0)).norm_sqr()),
        Err(e) => println!("find_fundamental: {e}"),
    }
    // overlap measurement
    let stack_te = RadialStack::standard(100.0, 5.0).unwrap();
    let te = solve_mode(&stack_te, 950.0, ModeFamily::TE11).unwrap();
    let stack_tm = RadialStack::standard(110.0, 5.0).unwrap();
    let tm = solve_mode(&stack_tm, 950.0, ModeFamily::TM01).unwrap();
    let p_te = far_field_pattern(&te, &stack_te, 950.0).unwrap();
    let p_tm = far_field_pattern(&tm, &stack_tm, 950.0).unwrap();
    println!("TE/TM pattern overlap = {:.4}", p_te.overlap(&p_tm));
    for &i in &[0usize, 45, 90, 135, 180] {
        println!("theta {:.0} deg: I_TE = {:.4e}  I_TM = {:.4e}", p_te.theta[i].to_degrees(), p_te.intensity[i], p_tm.intensity[i]);
    }
    // Fresnel r_t trend sanity
    println!("--- |r_t|^2 vs a (Fresnel on solved n_eff) ---");
    for &a in &[50.0, 53.0, 56.0, 60.0, 80.0, 100.0, 150.0, 250.0] {
        let s = RadialStack::standard(a, 5.0).unwrap();
        match find_fundamental(&s, 950.0, ModeFamily::TE11) {
            Ok(n) => println!("a={a}: n = {:.4}+{:.4}i  |r_t|^2 = {:.4}", n.re, n.im, ((n-1.0)/(n+1.0)).norm_sqr()),
            Err(e) => println!("a={a}: {e}"),
        }
    }
}
