use nalgebra::DMatrix;

#[test]
fn probe() {
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
    let svd = m.clone().svd(false, false);
    println!("no-uv singular values: {:?}", svd.singular_values.as_slice());
    let svd2 = m.svd(true, true);
    println!("uv singular values: {:?}", svd2.singular_values.as_slice());
}
