use criterion::{black_box, criterion_group, criterion_main, Criterion};
use infty_core::cycliccomplex::tsygan_window;
use infty_core::cyclicshuffle::{CyclicOperatorTable, TableOp};
use infty_core::fixtures::{dual_numbers, nonstrict_cinf, truncated_cubic};
use infty_core::gradedspace::Side;
use infty_core::hodge::{decompose_hochschild, HochschildFlavour};
use infty_core::homcomplex::{hochschild_window, Coefficients, Window};
use infty_core::inftystruct::validate_square_zero;
use infty_core::ncforms::{FormCalculus, Geometry};
use infty_core::GradedBasis;

fn shuffle_tables(c: &mut Criterion) {
    let basis = GradedBasis::from_pairs(&[("a", 0), ("b", 1), ("c", 2)], Side::W).unwrap();
    c.bench_function("e(1) on weight 5, three letters", |b| {
        b.iter(|| CyclicOperatorTable::new(&basis).weight_matrix(black_box(5), TableOp::E(1)).unwrap())
    });
}

fn complexes(c: &mut Criterion) {
    let dual = dual_numbers();
    c.bench_function("HH(dual numbers) degrees 0..4", |b| {
        b.iter(|| hochschild_window(&dual, Window::new(6, 0, 4), Coefficients::Dual).unwrap().cohomology_rows().unwrap())
    });
    c.bench_function("Tsygan(dual numbers) degrees 0..3", |b| {
        b.iter(|| tsygan_window(&dual, Window::new(5, 0, 3)).unwrap().total.cohomology_rows().unwrap())
    });
    let cubic = truncated_cubic();
    let mut group = c.benchmark_group("hodge");
    group.sample_size(10);
    group.bench_function("dual decomposition of x^3 = 0, degrees 0..3", |b| {
        b.iter(|| decompose_hochschild(&cubic, Window::new(5, 0, 3), HochschildFlavour::Dual).unwrap())
    });
    group.finish();
    let nonstrict = nonstrict_cinf();
    c.bench_function("square-zero check to weight 6", |b| b.iter(|| validate_square_zero(&nonstrict, black_box(6))));
}

fn forms(c: &mut Criterion) {
    let calc = FormCalculus::new(GradedBasis::from_pairs(&[("p", 0), ("q", 1)], Side::W).unwrap());
    let mut group = c.benchmark_group("forms");
    group.sample_size(10);
    group.bench_function("Poincaré slices to weight 5, associative", |b| b.iter(|| calc.poincare(Geometry::Ass, black_box(5)).unwrap()));
    group.bench_function("ζ slices to order 3, Lie", |b| b.iter(|| calc.zeta_slices(Geometry::Lie, black_box(3)).unwrap()));
    group.finish();
}

criterion_group!(benches, shuffle_tables, complexes, forms);
criterion_main!(benches);
