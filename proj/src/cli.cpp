namespace fng {
}
