fn main() {
    let (xl, wl) = cylfrac::quadrature::gauss_legendre(16);
    let (xj, wj) = cylfrac::quadrature::gauss_jacobi(16, 0.0, 0.0).unwrap();
    for i in 0..16 {
        println!("{i:2} GL {:+.12} {:.6}   GJ {:+.12} {:.6}", xl[i], wl[i], xj[i], wj[i]);
    }
}
